#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "statarb/csv.hpp"
#include "statarb/linalg.hpp"

namespace statarb {

inline constexpr double kTradingDaysPerYear = 252.0;
inline constexpr double kDefaultDt = 1.0 / kTradingDaysPerYear;

struct Benchmark {
  std::string ticker;
  Vector prices;
};

/// Rectangular date x ticker grid of adjusted closes. The benchmark, when
/// present, is held apart from the stock universe.
struct PricePanel {
  std::vector<Date> dates;
  std::vector<std::string> tickers;
  Matrix prices;
  std::optional<Benchmark> benchmark;

  Eigen::Index ticker_index(const std::string& ticker) const;
};

struct ReturnsPanel {
  std::vector<Date> dates;
  std::vector<std::string> tickers;
  Matrix returns;
  double dt = kDefaultDt;
  std::optional<Vector> benchmark_returns;

  Eigen::Index periods() const { return returns.rows(); }

  /// Rows [begin, begin + count).
  ReturnsPanel slice(Eigen::Index begin, Eigen::Index count) const;
};

/// Long CSV `date,ticker,adj_close`. Tickers lacking any date in the file's range are dropped.
PricePanel load_prices(const std::filesystem::path& path,
                       const std::optional<std::string>& benchmark = std::nullopt);

/// Same contract as load_prices, for in-memory text.
PricePanel parse_prices(const std::string& text,
                        const std::optional<std::string>& benchmark = std::nullopt);

void write_prices(const PricePanel& panel, const std::filesystem::path& path);

ReturnsPanel to_returns(const PricePanel& panel, double dt = kDefaultDt);

void write_returns(const ReturnsPanel& returns, const std::filesystem::path& path);

struct SurvivorshipAdjustment {
  ReturnsPanel adjusted;
  double alpha_b = 0.0;  // per year
  double beta_b = 0.0;
};

/// Regresses principal-factor returns on [dt, benchmark return] and removes
/// the fitted drift alpha_b * dt from every stock return.
SurvivorshipAdjustment survivorship_adjust(const ReturnsPanel& returns,
                                           const Vector& principal_factor_returns,
                                           const Vector& benchmark_returns, double dt);

}  // namespace statarb
