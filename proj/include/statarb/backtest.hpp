#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "statarb/marketdata.hpp"
#include "statarb/policy.hpp"

namespace statarb {

enum class SurvivorshipMode { None, FullSample, PerWindow };

const char* to_string(SurvivorshipMode mode);
std::optional<SurvivorshipMode> parse_survivorship(const std::string& text);

struct WindowSpec {
  int train_len = 220;
  int test_len = 15;
  int stride = 0;  // 0 means test_len
  int d_max = 15;
  int m = 6;
  double gamma = -70.0;
  double r = 0.01;
  double p_threshold = 0.01;
  double dt = kDefaultDt;
  bool shrinkage = true;
  std::optional<int> max_lag;
  SurvivorshipMode survivorship = SurvivorshipMode::FullSample;

  int effective_stride() const { return stride > 0 ? stride : test_len; }

  /// Every violated constraint, empty when valid.
  std::vector<std::string> problems() const;
};

struct PerformanceStats {
  double profit_pct = 0.0;
  double volatility = 0.0;
  double expected_return_pct = 0.0;
  double annualized_return_pct = 0.0;
  double sharpe = 0.0;  // NaN when volatility is zero
  double max_drawdown = 0.0;

  bool sharpe_defined() const;
};

PerformanceStats performance_stats(const WealthPath& path, double dt, double r);

struct WindowLog {
  int index = 0;
  Date train_start{};
  Date train_end{};
  Date test_start{};
  Date test_end{};
  std::vector<std::string> tickers;
  std::vector<double> delta_hat;
  std::vector<double> adf_pvalue;
  std::map<std::string, std::string> status;  // per variant: "ok", "cash", or an error message
  std::map<std::string, double> growth_rate;
  std::map<std::string, int> care_iterations;
  std::map<std::string, double> care_residual;
  std::map<std::string, bool> certificate_ok;
  std::vector<std::string> warnings;
  std::map<std::string, double> start_wealth;  // per policy
};

struct BacktestReport {
  int train_len = 0;
  int test_len = 0;
  double r = 0.0;
  double dt = kDefaultDt;
  std::map<PolicyKind, WealthPath> wealth;
  std::map<PolicyKind, PerformanceStats> stats;
  std::vector<WindowLog> windows;
  std::optional<double> alpha_b;
  std::optional<double> beta_b;

  bool empty() const { return windows.empty(); }
};

BacktestReport run_backtest(const PricePanel& panel, const WindowSpec& spec, int jobs = 1);

struct StatsRow {
  int train = 0;
  int test = 0;
  Variant variant = Variant::Unconstrained;
  PerformanceStats myopic;
  PerformanceStats optimal;
};

std::vector<StatsRow> stats_rows(const BacktestReport& report);
void write_stats(const std::vector<StatsRow>& rows, const std::filesystem::path& path);
std::vector<StatsRow> load_stats(const std::filesystem::path& path);

/// stats.csv, wealth_<policy>.csv for the four policies, windows.json.
void emit_report(const BacktestReport& report, const std::filesystem::path& dir);

/// One stats.csv covering all runs plus a train<T>_test<S>/ subdirectory per run.
void emit_sweep(const std::vector<BacktestReport>& reports, const std::filesystem::path& dir);

}  // namespace statarb
