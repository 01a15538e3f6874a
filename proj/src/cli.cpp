#include "statarb/cli.hpp"

#include <CLI11.hpp>
#include <iostream>
#include <set>

#include "statarb/cointegration.hpp"
#include "statarb/error.hpp"
#include "statarb/factors.hpp"
#include "statarb/hjb.hpp"
#include "statarb/marketdata.hpp"
#include "statarb/model.hpp"
#include "statarb/policy.hpp"
#include "statarb/synth.hpp"

namespace statarb {

namespace {

void log(const std::string& msg) { std::cerr << "statarb: " << msg << '\n'; }

class KeyReader {
 public:
  explicit KeyReader(const Json& j) : j_(j) {
    if (!j.is_object()) problems_.push_back("config must be a JSON object");
  }

  template <class T>
  void read(const std::string& key, T& out) {
    known_.insert(key);
    if (!j_.is_object() || !j_.contains(key)) return;
    const Json& v = j_.at(key);
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw std::invalid_argument("");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw std::invalid_argument("");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw std::invalid_argument("");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw std::invalid_argument("");
      }
      out = v.get<T>();
    } catch (const std::exception&) {
      problems_.push_back(key + ": wrong type (" + std::string(v.type_name()) + ")");
    }
  }

  bool has(const std::string& key) const { return j_.is_object() && j_.contains(key); }
  const Json& raw(const std::string& key) {
    known_.insert(key);
    return j_.at(key);
  }
  void note(const std::string& key) { known_.insert(key); }
  void problem(const std::string& p) { problems_.push_back(p); }

  void finish(const std::string& what) {
    if (j_.is_object()) {
      for (const auto& [k, v] : j_.items()) {
        if (!known_.count(k)) problems_.push_back("unknown key '" + k + "'");
      }
    }
    if (!problems_.empty()) {
      std::string msg = "invalid " + what + ":";
      for (const auto& p : problems_) msg += "\n  " + p;
      fail(ErrorKind::Config, msg);
    }
  }

 private:
  const Json& j_;
  std::set<std::string> known_;
  std::vector<std::string> problems_;
};

}  // namespace

RunConfig parse_run_config(const Json& j) {
  RunConfig c;
  KeyReader k(j);
  WindowSpec& w = c.window;
  k.read("train_len", w.train_len);
  k.read("test_len", w.test_len);
  k.read("stride", w.stride);
  k.read("d_max", w.d_max);
  k.read("m", w.m);
  k.read("gamma", w.gamma);
  k.read("r", w.r);
  k.read("p_threshold", w.p_threshold);
  k.read("dt", w.dt);
  k.read("shrinkage", w.shrinkage);
  k.read("seed", c.seed);
  if (k.has("max_lag")) {
    int lag = 0;
    k.read("max_lag", lag);
    w.max_lag = lag;
  } else {
    k.note("max_lag");
  }
  std::string surv = to_string(w.survivorship);
  k.read("survivorship", surv);
  if (auto mode = parse_survivorship(surv)) w.survivorship = *mode;
  else k.problem("survivorship: expected none, full or window");
  if (k.has("benchmark")) {
    std::string b;
    k.read("benchmark", b);
    c.benchmark = b;
  } else {
    k.note("benchmark");
  }
  k.read("sweep_train", c.sweep_train);
  k.read("sweep_test", c.sweep_test);
  for (const auto& p : w.problems()) k.problem(p);
  k.finish("config");
  return c;
}

SimulateConfig parse_simulate_config(const Json& j) {
  SimulateConfig c;
  KeyReader k(j);
  k.read("d", c.shape.d);
  k.read("m", c.shape.m);
  k.read("cointegrated", c.shape.cointegrated);
  k.read("delta_lo", c.shape.delta_lo);
  k.read("delta_hi", c.shape.delta_hi);
  k.read("slow_delta", c.shape.slow_delta);
  k.read("r", c.shape.r);
  k.read("n_steps", c.n_steps);
  k.read("seed", c.seed);
  k.read("dt", c.dt);
  k.read("benchmark", c.benchmark);
  k.read("start_date", c.start_date);
  if (k.has("market")) {
    try {
      c.market = synth_from_json(k.raw("market"));
    } catch (const Error& e) {
      k.problem(std::string("market: ") + e.what());
    }
  } else {
    k.note("market");
  }
  if (c.shape.d < 1) k.problem("d must be at least 1");
  if (c.shape.m < 1) k.problem("m must be at least 1");
  if (c.n_steps < 1) k.problem("n_steps must be at least 1");
  if (!(c.dt > 0.0)) k.problem("dt must be positive");
  if (!(c.shape.delta_lo > 0.0 && c.shape.delta_hi >= c.shape.delta_lo)) {
    k.problem("need 0 < delta_lo <= delta_hi");
  }
  if (!(c.shape.slow_delta > 0.0)) k.problem("slow_delta must be positive");
  if (!parse_date(c.start_date)) k.problem("start_date: expected YYYY-MM-DD");
  k.finish("simulate config");
  return c;
}

namespace {

constexpr const char* kRunKeys =
    "Config keys (JSON object; all optional):\n"
    "  train_len    int     220    training window, trading days\n"
    "  test_len     int     15     test window, trading days\n"
    "  stride       int     0      window advance; 0 means test_len\n"
    "  d_max        int     15     max stocks selected per window\n"
    "  m            int     6      number of eigenportfolio factors\n"
    "  gamma        number  -70    risk aversion exponent, must be negative\n"
    "  r            number  0.01   risk-free rate per year\n"
    "  p_threshold  number  0.01   ADF p-value cut-off\n"
    "  dt           number  1/252  period length in years\n"
    "  shrinkage    bool    true   Ledoit-Wolf shrinkage of covariances\n"
    "  max_lag      int     auto   ADF max lag (auto: Schwert rule capped at n/2-2)\n"
    "  survivorship string  full   none | full | window drift removal via the benchmark\n"
    "  benchmark    string  none   benchmark ticker in the price file\n"
    "  seed         int     0      recorded for reproducibility\n"
    "  sweep_train  [int]   190,200,...,250   train lengths for --sweep\n"
    "  sweep_test   [int]   10,11,...,16      test lengths for --sweep\n";

constexpr const char* kSimKeys =
    "Config keys (JSON object; all optional):\n"
    "  d            int     5      number of stocks\n"
    "  m            int     2      number of factors\n"
    "  cointegrated int     -1     fast-reverting stocks, -1 for all\n"
    "  delta_lo     number  25     lower bound of fast reversion speeds\n"
    "  delta_hi     number  80     upper bound of fast reversion speeds\n"
    "  slow_delta   number  0.05   speed of the non-cointegrated stocks\n"
    "  r            number  0.02   drift of the minor factors\n"
    "  n_steps      int     2520   simulated periods\n"
    "  seed         int     0      RNG seed\n"
    "  dt           number  1/252  period length in years\n"
    "  benchmark    bool    true   emit factor 1 as benchmark ticker MKT\n"
    "  start_date   string  2000-01-03  first business day\n"
    "  market       object  none   explicit market {eta, mu, delta, theta, sigma0, sigma1, cross};\n"
    "                              matrices as {rows, cols, data} row-major\n";

RunConfig load_run_config(const std::string& path) {
  if (path.empty()) return parse_run_config(Json::object());
  return parse_run_config(read_json(path));
}

PricePanel load_panel(const std::string& path, const RunConfig& cfg) {
  PricePanel p = load_prices(path, cfg.benchmark);
  log("loaded " + std::to_string(p.tickers.size()) + " tickers over " + std::to_string(p.dates.size()) + " dates");
  return p;
}

std::vector<std::string> synth_tickers(Eigen::Index d) {
  std::vector<std::string> out;
  for (Eigen::Index i = 0; i < d; ++i) {
    std::string s = std::to_string(i + 1);
    out.push_back("S" + std::string(s.size() < 3 ? 3 - s.size() : 0, '0') + s);
  }
  return out;
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) fail(ErrorKind::Io, "cannot create output directory '" + dir.string() + "'");
}

struct Screened {
  ReturnsPanel returns;
  Matrix factors;
  Matrix stocks;
  std::vector<CointegrationFit> fits;
  UniverseSelection selection;
};

/// Screens the most recent train_len periods of the panel.
Screened screen_panel(const PricePanel& panel, const WindowSpec& w) {
  ReturnsPanel all = to_returns(panel, w.dt);
  if (all.periods() < w.train_len) {
    fail(ErrorKind::InsufficientData, "panel has " + std::to_string(all.periods()) + " return periods; train_len is " +
                                          std::to_string(w.train_len));
  }
  Screened s;
  s.returns = all.slice(all.periods() - w.train_len, w.train_len);
  std::vector<Eigen::Index> cols;
  for (Eigen::Index j = 0; j < s.returns.returns.cols(); ++j) {
    const auto col = s.returns.returns.col(j);
    if ((col.array() - col.mean()).square().sum() > 1e-24) cols.push_back(j);
    else log("dropping " + s.returns.tickers[static_cast<std::size_t>(j)] + ": constant price");
  }
  ReturnsPanel kept = s.returns;
  kept.tickers.clear();
  kept.returns.resize(s.returns.periods(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) {
    kept.tickers.push_back(s.returns.tickers[static_cast<std::size_t>(cols[k])]);
    kept.returns.col(static_cast<Eigen::Index>(k)) = s.returns.returns.col(cols[k]);
  }
  if (static_cast<int>(cols.size()) < w.m) fail(ErrorKind::Data, "fewer tickers with varying prices than factors m");
  s.returns = std::move(kept);
  if (w.survivorship != SurvivorshipMode::None && s.returns.benchmark_returns) {
    EigenFactorSet f1 = build_factors(s.returns, 1);
    SurvivorshipAdjustment adj =
        survivorship_adjust(s.returns, s.returns.returns * f1.weights.col(0), *s.returns.benchmark_returns, w.dt);
    log("survivorship drift alpha_b " + format_double(adj.alpha_b) + ", beta_b " + format_double(adj.beta_b));
    s.returns = std::move(adj.adjusted);
  }
  EigenFactorSet fs = build_factors(s.returns, w.m);
  s.factors = s.returns.returns * fs.weights;
  ScreeningOptions opts;
  opts.max_lag = w.max_lag;
  for (Eigen::Index j = 0; j < s.returns.returns.cols(); ++j) {
    const auto& name = s.returns.tickers[static_cast<std::size_t>(j)];
    try {
      s.fits.push_back(fit_ticker(name, s.returns.returns.col(j), s.factors, w.dt, opts));
    } catch (const Error& e) {
      log(name + " skipped: " + e.what());
    }
  }
  s.selection = select_universe(s.fits, static_cast<std::size_t>(w.d_max), w.p_threshold);
  s.selection.window_start = s.returns.dates.front();
  s.selection.window_end = s.returns.dates.back();
  s.stocks.resize(s.returns.periods(), static_cast<Eigen::Index>(s.selection.size()));
  for (std::size_t i = 0; i < s.selection.size(); ++i) {
    const auto it = std::find(s.returns.tickers.begin(), s.returns.tickers.end(), s.selection.tickers[i]);
    s.stocks.col(static_cast<Eigen::Index>(i)) = s.returns.returns.col(it - s.returns.tickers.begin());
  }
  std::string sel;
  for (const auto& t : s.selection.tickers) sel += (sel.empty() ? "" : " ") + t;
  log("selected " + std::to_string(s.selection.size()) + " of " + std::to_string(s.fits.size()) +
      (sel.empty() ? "" : ": " + sel));
  return s;
}

int cmd_screen(const std::string& prices, const std::string& config, const std::string& out) {
  const RunConfig cfg = load_run_config(config);
  const PricePanel panel = load_panel(prices, cfg);
  const Screened s = screen_panel(panel, cfg.window);
  ensure_dir(out);
  write_screening(s.fits, s.selection, std::filesystem::path(out) / "screening.csv");
  return 0;
}

int cmd_solve(const std::string& prices, const std::string& model_path, const std::string& config,
              const std::string& out) {
  const RunConfig cfg = load_run_config(config);
  ModelParams model;
  if (!model_path.empty()) {
    model = model_from_json(read_json(model_path));
  } else {
    const PricePanel panel = load_panel(prices, cfg);
    const Screened s = screen_panel(panel, cfg.window);
    if (s.selection.size() == 0) fail(ErrorKind::Data, "no co-integrated stocks at p <= " + format_double(cfg.window.p_threshold));
    const double eta1 = s.returns.benchmark_returns ? s.returns.benchmark_returns->mean() / cfg.window.dt
                                                    : s.factors.col(0).mean() / cfg.window.dt;
    model = assemble(s.selection, s.factors, s.stocks, eta1, cfg.window.r, cfg.window.gamma, cfg.window.dt,
                     ShrinkageConfig{cfg.window.shrinkage});
  }
  for (const auto& w : model.warnings) log("warning: " + w);
  ensure_dir(out);
  const std::filesystem::path dir(out);
  write_json(model_to_json(model), dir / "model.json");
  for (Variant v : {Variant::Unconstrained, Variant::Constrained}) {
    HJBSolution sol = solve_hjb(model, v);
    log(std::string(to_string(v)) + ": growth rate " + format_double(sol.growth_rate) + ", CARE iterations " +
        std::to_string(sol.care_iterations) + ", residual " + format_double(sol.care_residual));
    for (const auto& n : sol.certificate.notes) log("  " + n);
    write_json(solution_to_json(sol), dir / (std::string("solution_") + to_string(v) + ".json"));
  }
  return 0;
}

int cmd_backtest(const std::string& prices, const std::string& config, const std::string& out, int jobs, bool sweep) {
  const RunConfig cfg = load_run_config(config);
  if (jobs < 1) fail(ErrorKind::Config, "--jobs must be at least 1");
  const PricePanel panel = load_panel(prices, cfg);
  ensure_dir(out);
  auto run = [&](const WindowSpec& w) {
    BacktestReport rep = run_backtest(panel, w, jobs);
    for (const auto& win : rep.windows) {
      std::string msg = "train " + std::to_string(w.train_len) + " test " + std::to_string(w.test_len) + " window " +
                        std::to_string(win.index) + " " + format_date(win.test_start) + ": " +
                        std::to_string(win.tickers.size()) + " stocks";
      for (const auto& [variant, status] : win.status) msg += ", " + variant + " " + status;
      log(msg);
    }
    return rep;
  };
  if (!sweep) {
    emit_report(run(cfg.window), out);
    return 0;
  }
  std::vector<BacktestReport> reports;
  for (int train : cfg.sweep_train) {
    for (int test : cfg.sweep_test) {
      WindowSpec w = cfg.window;
      w.train_len = train;
      w.test_len = test;
      w.stride = 0;
      const auto problems = w.problems();
      if (!problems.empty()) fail(ErrorKind::Config, "sweep point train " + std::to_string(train) + " test " +
                                                         std::to_string(test) + ": " + problems.front());
      reports.push_back(run(w));
    }
  }
  emit_sweep(reports, out);
  return 0;
}

int cmd_simulate(const std::string& config, const std::string& out) {
  const SimulateConfig cfg = parse_simulate_config(config.empty() ? Json::object() : read_json(config));
  SynthConfig market;
  if (cfg.market) {
    market = *cfg.market;
    if (market.n_steps < 1) market.n_steps = cfg.n_steps;
  } else {
    market = random_market(cfg.shape, cfg.n_steps, cfg.seed);
    market.dt = cfg.dt;
  }
  market.seed = cfg.seed;
  const SynthPath path = simulate(market);
  const auto tickers = synth_tickers(market.d);
  const PricePanel panel = to_panel(path, tickers, cfg.benchmark ? std::optional<std::string>("MKT") : std::nullopt,
                                    *parse_date(cfg.start_date));
  ensure_dir(out);
  const std::filesystem::path dir(out);
  write_prices(panel, dir / "prices.csv");
  write_json(truth_json(market, path, tickers), dir / "truth.json");
  log("simulated " + std::to_string(market.d) + " stocks, " + std::to_string(market.m) + " factors, " +
      std::to_string(market.n_steps) + " steps");
  return 0;
}

int cmd_report(const std::string& in, const std::string& out) {
  const std::filesystem::path dir(in);
  const Json meta = read_json(dir / "windows.json");
  BacktestReport rep;
  rep.train_len = meta.value("train_len", 0);
  rep.test_len = meta.value("test_len", 0);
  rep.r = meta.value("r", 0.0);
  rep.dt = meta.value("dt", kDefaultDt);
  rep.windows.resize(meta.contains("windows") ? meta.at("windows").size() : 0);
  for (PolicyKind k : kAllPolicies) {
    WealthPath p = load_wealth(dir / (std::string("wealth_") + to_string(k) + ".csv"));
    rep.stats[k] = performance_stats(p, rep.dt, rep.r);
    const auto& s = rep.stats[k];
    log(std::string(to_string(k)) + ": profit " + format_double(s.profit_pct) + "%, sharpe " +
        format_double(s.sharpe) + ", max drawdown " + format_double(s.max_drawdown));
  }
  const std::filesystem::path target = out.empty() ? dir / "stats_recomputed.csv" : std::filesystem::path(out);
  write_stats(stats_rows(rep), target);
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Factor/spread statistical arbitrage: screening, HJB solving, backtesting, simulation"};
  app.require_subcommand(1);

  std::string prices, config, out = ".", model, in;
  int jobs = 1;
  bool sweep = false;

  auto* screen = app.add_subcommand("screen", "Co-integration screen of the latest training window");
  screen->add_option("--prices", prices, "Long price CSV date,ticker,adj_close")->required();
  screen->add_option("--config", config, "JSON config");
  screen->add_option("--out", out, "Output directory (screening.csv)")->capture_default_str();
  screen->footer(kRunKeys);

  auto* solve = app.add_subcommand("solve", "Assemble the model and solve both HJB variants");
  auto* prices_opt = solve->add_option("--prices", prices, "Long price CSV date,ticker,adj_close");
  auto* model_opt = solve->add_option("--model", model, "Model JSON written by a previous solve");
  prices_opt->excludes(model_opt);
  solve->add_option("--config", config, "JSON config");
  solve->add_option("--out", out, "Output directory (model.json, solution_*.json)")->capture_default_str();
  solve->footer(kRunKeys);

  auto* backtest = app.add_subcommand("backtest", "Sliding-window backtest of the four policies");
  backtest->add_option("--prices", prices, "Long price CSV date,ticker,adj_close")->required();
  backtest->add_option("--config", config, "JSON config");
  backtest->add_option("--out", out, "Output directory (stats.csv, wealth_<policy>.csv, windows.json)")
      ->capture_default_str();
  backtest->add_option("--jobs", jobs, "Parallel window training threads")->capture_default_str();
  backtest->add_flag("--sweep", sweep, "Run the sweep_train x sweep_test grid");
  backtest->footer(kRunKeys);

  auto* sim = app.add_subcommand("simulate", "Simulate a synthetic market with known parameters");
  sim->add_option("--config", config, "JSON config");
  sim->add_option("--out", out, "Output directory (prices.csv, truth.json)")->capture_default_str();
  sim->footer(kSimKeys);

  auto* report = app.add_subcommand("report", "Recompute statistics from a backtest output directory");
  report->add_option("--in", in, "Backtest output directory")->required();
  report->add_option("--out", out, "Stats CSV path (default <in>/stats_recomputed.csv)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*screen) return cmd_screen(prices, config, out);
    if (*solve) {
      if (prices.empty() && model.empty()) fail(ErrorKind::Config, "solve needs --prices or --model");
      return cmd_solve(prices, model, config, out);
    }
    if (*backtest) return cmd_backtest(prices, config, out, jobs, sweep);
    if (*sim) return cmd_simulate(config, out);
    if (*report) return cmd_report(in, report->count("--out") ? out : std::string());
  } catch (const Error& e) {
    log(std::string(to_string(e.kind())) + " error: " + e.what());
    return is_numerical(e.kind()) ? 2 : 1;
  } catch (const std::exception& e) {
    log(std::string("error: ") + e.what());
    return 1;
  }
  return 1;
}

int run_cli(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args);
}

}  // namespace statarb
