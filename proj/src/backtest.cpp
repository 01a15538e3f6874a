#include "statarb/backtest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <json.hpp>
#include <limits>
#include <sstream>
#include <thread>

#include "statarb/cointegration.hpp"
#include "statarb/error.hpp"
#include "statarb/factors.hpp"
#include "statarb/hjb.hpp"
#include "statarb/model.hpp"

namespace statarb {

const char* to_string(SurvivorshipMode mode) {
  switch (mode) {
    case SurvivorshipMode::None: return "none";
    case SurvivorshipMode::FullSample: return "full";
    case SurvivorshipMode::PerWindow: return "window";
  }
  return "none";
}

std::optional<SurvivorshipMode> parse_survivorship(const std::string& text) {
  if (text == "none") return SurvivorshipMode::None;
  if (text == "full") return SurvivorshipMode::FullSample;
  if (text == "window") return SurvivorshipMode::PerWindow;
  return std::nullopt;
}

std::vector<std::string> WindowSpec::problems() const {
  std::vector<std::string> out;
  if (!(test_len > 0)) out.push_back("test_len must be positive");
  if (!(train_len > test_len)) out.push_back("train_len must exceed test_len");
  if (stride < 0) out.push_back("stride must be non-negative");
  if (!(m >= 1)) out.push_back("m must be at least 1");
  if (!(d_max >= 1)) out.push_back("d_max must be at least 1");
  if (!(gamma < 0.0)) out.push_back("gamma must be negative");
  if (!std::isfinite(r)) out.push_back("r must be finite");
  if (!(p_threshold > 0.0 && p_threshold <= 1.0)) out.push_back("p_threshold must lie in (0, 1]");
  if (!(dt > 0.0)) out.push_back("dt must be positive");
  if (max_lag && *max_lag < 0) out.push_back("max_lag must be non-negative");
  return out;
}

bool PerformanceStats::sharpe_defined() const { return std::isfinite(sharpe); }

PerformanceStats performance_stats(const WealthPath& path, double dt, double r) {
  const Eigen::Index n = path.wealth.size() - 1;
  if (n < 1) fail(ErrorKind::InsufficientData, "performance_stats: need at least 2 wealth points");
  const Vector& w = path.wealth;
  const Vector rets = (w.tail(n).array() / w.head(n).array() - 1.0).matrix();
  PerformanceStats s;
  const double profit = (w(n) - w(0)) / w(0);
  s.profit_pct = 100.0 * profit;
  const double mean = rets.mean();
  const double var = n > 1 ? (rets.array() - mean).square().sum() / static_cast<double>(n - 1) : 0.0;
  s.volatility = std::sqrt(var) / std::sqrt(dt);
  s.expected_return_pct = 100.0 / dt * mean;
  double days = 0.0;
  if (path.dates.size() == static_cast<std::size_t>(n + 1)) {
    days = static_cast<double>((path.dates.back() - path.dates.front()).count());
  } else {
    days = static_cast<double>(n) * dt * 365.0;
  }
  s.annualized_return_pct = days > 0.0 ? 100.0 * (std::pow(1.0 + profit, 365.0 / days) - 1.0) : 0.0;
  s.sharpe = s.volatility > 0.0 ? 0.01 * (s.annualized_return_pct - 100.0 * r) / s.volatility
                                : std::numeric_limits<double>::quiet_NaN();
  double peak = w(0);
  for (Eigen::Index t = 0; t <= n; ++t) {
    peak = std::max(peak, w(t));
    s.max_drawdown = std::max(s.max_drawdown, (peak - w(t)) / peak);
  }
  return s;
}

namespace {

struct Trained {
  std::vector<Eigen::Index> universe;
  Matrix factor_weights;
  std::vector<Eigen::Index> selected;
  Vector alpha;
  Matrix beta_ols;
  Vector z0;
  double intercept = 0.0;
  std::map<PolicyKind, ControlPolicy> policies;
  WindowLog log;
};

Trained train_window(const ReturnsPanel& rets, Eigen::Index begin, const WindowSpec& spec, int index) {
  Trained tr;
  WindowLog& log = tr.log;
  log.index = index;
  const Eigen::Index len = spec.train_len;
  log.train_start = rets.dates[static_cast<std::size_t>(begin)];
  log.train_end = rets.dates[static_cast<std::size_t>(begin + len - 1)];
  for (const char* v : {"unconstrained", "constrained"}) log.status[v] = "cash";

  auto cash_all = [&](const std::string& why) {
    for (auto& [k, v] : log.status) v = "cash: " + why;
  };

  Matrix train = rets.returns.middleRows(begin, len);
  std::optional<Vector> bench;
  if (rets.benchmark_returns) bench = rets.benchmark_returns->segment(begin, len);

  std::vector<Eigen::Index> universe;
  for (Eigen::Index j = 0; j < train.cols(); ++j) {
    const double mean = train.col(j).mean();
    const double var = (train.col(j).array() - mean).square().sum();
    if (var > 1e-24) universe.push_back(j);
  }
  if (static_cast<int>(universe.size()) < spec.m) {
    cash_all("fewer tickers with varying returns than factors");
    return tr;
  }
  Matrix ru(len, static_cast<Eigen::Index>(universe.size()));
  std::vector<std::string> names;
  for (std::size_t k = 0; k < universe.size(); ++k) {
    ru.col(static_cast<Eigen::Index>(k)) = train.col(universe[k]);
    names.push_back(rets.tickers[static_cast<std::size_t>(universe[k])]);
  }

  EigenFactorSet fs;
  try {
    if (spec.survivorship == SurvivorshipMode::PerWindow && bench) {
      Correlation c0 = correlation_matrix(ru, names);
      EigenFactorSet f0 = eigenportfolios(c0.rho, c0.sigma, 1);
      const Vector f1 = ru * f0.weights.col(0);
      const Vector xc = bench->array() - bench->mean();
      const double sxx = xc.squaredNorm();
      if (sxx > 0.0) {
        const double slope = xc.dot((f1.array() - f1.mean()).matrix()) / sxx;
        tr.intercept = f1.mean() - slope * bench->mean();
        ru.array() -= tr.intercept;
      } else {
        log.warnings.push_back("benchmark has zero variance in window; no survivorship adjustment");
      }
    }
    Correlation corr = correlation_matrix(ru, names);
    fs = eigenportfolios(corr.rho, corr.sigma, spec.m);
  } catch (const Error& e) {
    cash_all(e.what());
    return tr;
  }
  const Matrix factors = ru * fs.weights;

  ScreeningOptions opts;
  opts.max_lag = spec.max_lag;
  std::vector<CointegrationFit> fits;
  std::vector<Eigen::Index> fit_col;
  for (std::size_t k = 0; k < universe.size(); ++k) {
    try {
      fits.push_back(fit_ticker(names[k], ru.col(static_cast<Eigen::Index>(k)), factors, spec.dt, opts));
      fit_col.push_back(static_cast<Eigen::Index>(k));
    } catch (const Error& e) {
      log.warnings.push_back(names[k] + ": " + e.what());
    }
  }
  UniverseSelection sel = select_universe(fits, static_cast<std::size_t>(spec.d_max), spec.p_threshold);
  sel.window_start = log.train_start;
  sel.window_end = log.train_end;
  for (const auto& f : sel.fits) {
    log.tickers.push_back(f.ticker);
    log.delta_hat.push_back(*f.delta_hat);
    log.adf_pvalue.push_back(f.adf_pvalue);
  }
  if (sel.tickers.empty()) {
    cash_all("no co-integrated stocks");
    return tr;
  }

  const Eigen::Index d = static_cast<Eigen::Index>(sel.tickers.size());
  Matrix stocks(len, d);
  tr.alpha.resize(d);
  tr.beta_ols.resize(d, spec.m);
  tr.z0.resize(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const auto& name = sel.tickers[static_cast<std::size_t>(i)];
    const auto k = static_cast<std::size_t>(std::find(names.begin(), names.end(), name) - names.begin());
    stocks.col(i) = ru.col(static_cast<Eigen::Index>(k));
    tr.selected.push_back(universe[k]);
    const auto& f = sel.fits[static_cast<std::size_t>(i)];
    tr.alpha(i) = f.alpha;
    tr.beta_ols.row(i) = f.beta_row.transpose();
    tr.z0(i) = f.z_series(f.z_series.size() - 1);
  }
  tr.universe = universe;
  tr.factor_weights = fs.weights;

  const double eta1 = bench ? bench->mean() / spec.dt : factors.col(0).mean() / spec.dt;
  ModelParams model;
  try {
    model = assemble(sel, factors, stocks, eta1, spec.r, spec.gamma, spec.dt, ShrinkageConfig{spec.shrinkage});
  } catch (const Error& e) {
    cash_all(e.what());
    tr.selected.clear();
    return tr;
  }
  for (const auto& w : model.warnings) log.warnings.push_back(w);

  for (Variant v : {Variant::Unconstrained, Variant::Constrained}) {
    const std::string key = to_string(v);
    const PolicyKind myopic = v == Variant::Unconstrained ? PolicyKind::MyopicUnconstrained : PolicyKind::MyopicNeutral;
    const PolicyKind optimal = v == Variant::Unconstrained ? PolicyKind::OptimalUnconstrained : PolicyKind::OptimalNeutral;
    tr.policies.emplace(myopic, ControlPolicy(myopic, model));
    try {
      HJBSolution sol = solve_hjb(model, v);
      log.growth_rate[key] = sol.growth_rate;
      log.care_iterations[key] = sol.care_iterations;
      log.care_residual[key] = sol.care_residual;
      log.certificate_ok[key] = sol.certificate.steady_state_guaranteed;
      tr.policies.emplace(optimal, ControlPolicy(optimal, model, std::move(sol)));
      log.status[key] = "ok";
    } catch (const Error& e) {
      log.status[key] = std::string("optimal in cash: ") + e.what();
    }
  }
  return tr;
}

std::vector<Trained> train_all(const ReturnsPanel& rets, const std::vector<Eigen::Index>& starts,
                               const WindowSpec& spec, int jobs) {
  std::vector<Trained> out(starts.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < starts.size(); k = next++) {
      out[k] = train_window(rets, starts[k], spec, static_cast<int>(k));
    }
  };
  const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(starts.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return out;
}

}  // namespace

BacktestReport run_backtest(const PricePanel& panel, const WindowSpec& spec, int jobs) {
  const auto problems = spec.problems();
  if (!problems.empty()) {
    std::string msg = "invalid window spec:";
    for (const auto& p : problems) msg += "\n  " + p;
    fail(ErrorKind::Config, msg);
  }
  ReturnsPanel rets = to_returns(panel, spec.dt);
  const Eigen::Index n = rets.periods();
  if (n < spec.train_len + spec.test_len) {
    fail(ErrorKind::InsufficientData, "panel has " + std::to_string(n) + " return periods; need train_len + test_len = " +
                                          std::to_string(spec.train_len + spec.test_len));
  }

  BacktestReport report;
  report.train_len = spec.train_len;
  report.test_len = spec.test_len;
  report.r = spec.r;
  report.dt = spec.dt;

  if (spec.survivorship == SurvivorshipMode::FullSample && rets.benchmark_returns) {
    std::vector<Eigen::Index> cols;
    for (Eigen::Index j = 0; j < rets.returns.cols(); ++j) {
      const double mean = rets.returns.col(j).mean();
      if ((rets.returns.col(j).array() - mean).square().sum() > 1e-24) cols.push_back(j);
    }
    if (!cols.empty()) {
      Matrix sub(n, static_cast<Eigen::Index>(cols.size()));
      for (std::size_t k = 0; k < cols.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = rets.returns.col(cols[k]);
      try {
        Correlation c = correlation_matrix(sub);
        EigenFactorSet f = eigenportfolios(c.rho, c.sigma, 1);
        SurvivorshipAdjustment adj = survivorship_adjust(rets, sub * f.weights.col(0), *rets.benchmark_returns, spec.dt);
        report.alpha_b = adj.alpha_b;
        report.beta_b = adj.beta_b;
        rets = std::move(adj.adjusted);
      } catch (const Error&) {
        // degenerate benchmark or market: leave returns unadjusted
      }
    }
  }

  std::vector<Eigen::Index> starts;
  for (Eigen::Index s = 0; s + spec.train_len + spec.test_len <= n; s += spec.effective_stride()) starts.push_back(s);
  std::vector<Trained> trained = train_all(rets, starts, spec, jobs);

  const Eigen::Index width = spec.d_max;
  struct Acc {
    std::vector<Date> dates;
    std::vector<double> wealth;
    std::vector<Vector> weights;
    std::vector<double> cash;
  };
  std::map<PolicyKind, Acc> acc;
  for (PolicyKind k : kAllPolicies) {
    acc[k].wealth.push_back(1.0);
    acc[k].dates.push_back(panel.dates[static_cast<std::size_t>(starts.front() + spec.train_len)]);
  }

  for (std::size_t w = 0; w < trained.size(); ++w) {
    Trained& tr = trained[w];
    const Eigen::Index tb = starts[w] + spec.train_len;
    const Eigen::Index len = std::min<Eigen::Index>(spec.test_len, spec.effective_stride());
    tr.log.test_start = rets.dates[static_cast<std::size_t>(tb)];
    tr.log.test_end = rets.dates[static_cast<std::size_t>(tb + len - 1)];
    Matrix test = rets.returns.middleRows(tb, len);
    test.array() -= tr.intercept;
    const Eigen::Index d = static_cast<Eigen::Index>(tr.selected.size());

    Matrix z(len, d);
    Matrix stock_ret(len, d);
    if (d > 0) {
      Matrix tu(len, static_cast<Eigen::Index>(tr.universe.size()));
      for (std::size_t k = 0; k < tr.universe.size(); ++k) tu.col(static_cast<Eigen::Index>(k)) = test.col(tr.universe[k]);
      const Matrix f = tu * tr.factor_weights;
      for (Eigen::Index i = 0; i < d; ++i) stock_ret.col(i) = test.col(tr.selected[static_cast<std::size_t>(i)]);
      Vector zt = tr.z0;
      for (Eigen::Index t = 0; t < len; ++t) {
        z.row(t) = zt.transpose();
        zt += stock_ret.row(t).transpose() - tr.alpha * spec.dt - tr.beta_ols * f.row(t).transpose();
      }
    }

    for (PolicyKind k : kAllPolicies) {
      Acc& a = acc[k];
      tr.log.start_wealth[to_string(k)] = a.wealth.back();
      auto it = tr.policies.find(k);
      Matrix pi = Matrix::Zero(len, d);
      if (it != tr.policies.end()) {
        for (Eigen::Index t = 0; t < len; ++t) pi.row(t) = it->second.control(z.row(t).transpose()).transpose();
      }
      WealthOptions opts;
      opts.w0 = a.wealth.back();
      for (Eigen::Index t = 0; t <= len; ++t) opts.dates.push_back(panel.dates[static_cast<std::size_t>(tb + t)]);
      WealthPath seg = wealth_from_weights(pi, stock_ret, spec.r, spec.dt, opts);
      for (Eigen::Index t = 0; t < len; ++t) {
        Vector padded = Vector::Zero(std::max(width, d));
        padded.head(d) = pi.row(t).transpose();
        a.weights.push_back(padded.head(width));
        a.cash.push_back(seg.cash_weight_history(t));
        a.wealth.push_back(seg.wealth(t + 1));
        a.dates.push_back(opts.dates[static_cast<std::size_t>(t + 1)]);
      }
    }
    report.windows.push_back(std::move(tr.log));
  }

  for (PolicyKind k : kAllPolicies) {
    Acc& a = acc[k];
    WealthPath p;
    p.dates = a.dates;
    p.wealth = Eigen::Map<const Vector>(a.wealth.data(), static_cast<Eigen::Index>(a.wealth.size()));
    p.cash_weight_history = Eigen::Map<const Vector>(a.cash.data(), static_cast<Eigen::Index>(a.cash.size()));
    p.weights_history.resize(static_cast<Eigen::Index>(a.weights.size()), width);
    for (std::size_t t = 0; t < a.weights.size(); ++t) p.weights_history.row(static_cast<Eigen::Index>(t)) = a.weights[t].transpose();
    report.stats[k] = performance_stats(p, spec.dt, spec.r);
    report.wealth[k] = std::move(p);
  }
  return report;
}

std::vector<StatsRow> stats_rows(const BacktestReport& report) {
  std::vector<StatsRow> rows;
  if (report.empty()) return rows;
  for (Variant v : {Variant::Unconstrained, Variant::Constrained}) {
    StatsRow row;
    row.train = report.train_len;
    row.test = report.test_len;
    row.variant = v;
    row.myopic = report.stats.at(v == Variant::Unconstrained ? PolicyKind::MyopicUnconstrained : PolicyKind::MyopicNeutral);
    row.optimal = report.stats.at(v == Variant::Unconstrained ? PolicyKind::OptimalUnconstrained : PolicyKind::OptimalNeutral);
    rows.push_back(row);
  }
  return rows;
}

namespace {

constexpr const char* kStatsHeader =
    "train,test,variant,profit_pct_myopic,profit_pct_optimal,volatility_myopic,volatility_optimal,"
    "expected_return_pct_myopic,expected_return_pct_optimal,annualized_return_pct_myopic,"
    "annualized_return_pct_optimal,sharpe_myopic,sharpe_optimal,max_drawdown_myopic,max_drawdown_optimal";

const char* variant_label(Variant v) { return v == Variant::Unconstrained ? "unconstrained" : "neutral"; }

}  // namespace

void write_stats(const std::vector<StatsRow>& rows, const std::filesystem::path& path) {
  std::ostringstream out;
  out << kStatsHeader << '\n';
  for (const auto& r : rows) {
    auto pair = [&](double a, double b) { out << ',' << format_double(a) << ',' << format_double(b); };
    out << r.train << ',' << r.test << ',' << variant_label(r.variant);
    pair(r.myopic.profit_pct, r.optimal.profit_pct);
    pair(r.myopic.volatility, r.optimal.volatility);
    pair(r.myopic.expected_return_pct, r.optimal.expected_return_pct);
    pair(r.myopic.annualized_return_pct, r.optimal.annualized_return_pct);
    pair(r.myopic.sharpe, r.optimal.sharpe);
    pair(r.myopic.max_drawdown, r.optimal.max_drawdown);
    out << '\n';
  }
  write_text(path, out.str());
}

std::vector<StatsRow> load_stats(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty() || lines[0] != kStatsHeader) fail(ErrorKind::Parse, path.string() + ": line 1: unexpected stats header");
  std::vector<StatsRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = split_csv_line(lines[i]);
    const std::string where = path.string() + ": line " + std::to_string(i + 1);
    if (f.size() != 15) fail(ErrorKind::Parse, where + ": expected 15 fields");
    auto num = [&](std::size_t k) {
      if (f[k] == "nan" || f[k] == "-nan") return std::numeric_limits<double>::quiet_NaN();
      auto v = parse_double(f[k]);
      if (!v) fail(ErrorKind::Parse, where + ": bad number '" + f[k] + "'");
      return *v;
    };
    StatsRow r;
    r.train = static_cast<int>(num(0));
    r.test = static_cast<int>(num(1));
    if (f[2] == "unconstrained") r.variant = Variant::Unconstrained;
    else if (f[2] == "neutral") r.variant = Variant::Constrained;
    else fail(ErrorKind::Parse, where + ": unknown variant '" + f[2] + "'");
    r.myopic.profit_pct = num(3);
    r.optimal.profit_pct = num(4);
    r.myopic.volatility = num(5);
    r.optimal.volatility = num(6);
    r.myopic.expected_return_pct = num(7);
    r.optimal.expected_return_pct = num(8);
    r.myopic.annualized_return_pct = num(9);
    r.optimal.annualized_return_pct = num(10);
    r.myopic.sharpe = num(11);
    r.optimal.sharpe = num(12);
    r.myopic.max_drawdown = num(13);
    r.optimal.max_drawdown = num(14);
    rows.push_back(r);
  }
  return rows;
}

namespace {

nlohmann::json window_json(const WindowLog& w) {
  nlohmann::json j;
  j["index"] = w.index;
  j["train_start"] = format_date(w.train_start);
  j["train_end"] = format_date(w.train_end);
  j["test_start"] = format_date(w.test_start);
  j["test_end"] = format_date(w.test_end);
  j["tickers"] = w.tickers;
  j["delta_hat"] = w.delta_hat;
  j["adf_pvalue"] = w.adf_pvalue;
  j["status"] = w.status;
  j["growth_rate"] = w.growth_rate;
  j["care_iterations"] = w.care_iterations;
  j["care_residual"] = w.care_residual;
  j["certificate_ok"] = w.certificate_ok;
  j["warnings"] = w.warnings;
  j["start_wealth"] = w.start_wealth;
  return j;
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    fail(ErrorKind::Io, "cannot create output directory '" + dir.string() + "'");
  }
}

void emit_run_files(const BacktestReport& report, const std::filesystem::path& dir) {
  for (const auto& [kind, path] : report.wealth) {
    write_wealth(path, dir / (std::string("wealth_") + to_string(kind) + ".csv"));
  }
  nlohmann::json j;
  j["train_len"] = report.train_len;
  j["test_len"] = report.test_len;
  j["r"] = report.r;
  j["dt"] = report.dt;
  if (report.alpha_b) j["alpha_b"] = *report.alpha_b;
  if (report.beta_b) j["beta_b"] = *report.beta_b;
  j["windows"] = nlohmann::json::array();
  for (const auto& w : report.windows) j["windows"].push_back(window_json(w));
  write_text(dir / "windows.json", j.dump(2) + "\n");
}

}  // namespace

void emit_report(const BacktestReport& report, const std::filesystem::path& dir) {
  ensure_dir(dir);
  write_stats(stats_rows(report), dir / "stats.csv");
  emit_run_files(report, dir);
}

void emit_sweep(const std::vector<BacktestReport>& reports, const std::filesystem::path& dir) {
  ensure_dir(dir);
  std::vector<StatsRow> rows;
  for (const auto& r : reports) {
    auto part = stats_rows(r);
    rows.insert(rows.end(), part.begin(), part.end());
    const auto sub = dir / ("train" + std::to_string(r.train_len) + "_test" + std::to_string(r.test_len));
    ensure_dir(sub);
    emit_run_files(r, sub);
  }
  write_stats(rows, dir / "stats.csv");
}

}  // namespace statarb
