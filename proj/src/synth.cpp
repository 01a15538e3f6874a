#include "statarb/synth.hpp"

#include <cmath>
#include <sstream>

#include "statarb/error.hpp"
#include "statarb/rng.hpp"

namespace statarb {

Matrix SynthPath::stock_returns() const {
  const Eigen::Index n = stock_levels.rows() - 1;
  return (stock_levels.bottomRows(n).array() / stock_levels.topRows(n).array() - 1.0).matrix();
}

Matrix SynthPath::factor_returns() const {
  const Eigen::Index n = factor_levels.rows() - 1;
  return (factor_levels.bottomRows(n).array() / factor_levels.topRows(n).array() - 1.0).matrix();
}

Matrix joint_diffusion(const SynthConfig& c) {
  Matrix g(c.m + c.d, c.m + c.d);
  g.topLeftCorner(c.m, c.m) = c.sigma0;
  g.topRightCorner(c.m, c.d) = c.cross.transpose();
  g.bottomLeftCorner(c.d, c.m) = c.cross;
  g.bottomRightCorner(c.d, c.d) = c.sigma1;
  return g;
}

void validate(const SynthConfig& c) {
  std::vector<std::string> problems;
  auto dim = [&](bool ok, const std::string& what) {
    if (!ok) problems.push_back(what);
  };
  dim(c.d >= 1, "d must be at least 1");
  dim(c.m >= 1, "m must be at least 1");
  dim(c.eta.size() == c.m, "eta must have length m");
  dim(c.mu.size() == c.d, "mu must have length d");
  dim(c.delta.size() == c.d, "delta must have length d");
  dim(c.theta.size() == c.d, "theta must have length d");
  dim(c.sigma0.rows() == c.m && c.sigma0.cols() == c.m, "sigma0 must be m x m");
  dim(c.sigma1.rows() == c.d && c.sigma1.cols() == c.d, "sigma1 must be d x d");
  dim(c.cross.rows() == c.d && c.cross.cols() == c.m, "cross must be d x m");
  dim(c.dt > 0.0, "dt must be positive");
  dim(c.n_steps >= 1, "n_steps must be at least 1");
  dim(c.s0 > 0.0 && c.f0 > 0.0, "initial levels must be positive");
  if (c.z0) dim(c.z0->size() == c.d, "z0 must have length d");
  if (problems.empty()) {
    if (!(c.delta.array() > 0.0).all()) problems.push_back("delta entries must be positive");
    const Matrix g = joint_diffusion(c);
    const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
    if (asymmetry(c.sigma0) > 1e-12 * scale || asymmetry(c.sigma1) > 1e-12 * scale) {
      problems.push_back("sigma0 and sigma1 must be symmetric");
    } else {
      const double lo = min_eigenvalue(g);
      if (lo < -1e-12 * scale) {
        std::ostringstream msg;
        msg << "joint diffusion [[sigma0, cross'], [cross, sigma1]] is not positive semi-definite: "
            << "min eigenvalue " << lo;
        problems.push_back(msg.str());
      }
      if (min_eigenvalue(c.sigma0) <= 0.0 && c.sigma0.norm() > 0.0) {
        problems.push_back("sigma0 must be positive definite (or zero)");
      }
    }
  }
  if (!problems.empty()) {
    std::string msg = "invalid synthetic market:";
    for (const auto& p : problems) msg += "\n  " + p;
    fail(ErrorKind::Config, msg);
  }
}

namespace {

Matrix implied_beta(const SynthConfig& c) {
  if (c.sigma0.norm() == 0.0) return Matrix::Zero(c.d, c.m);
  return c.sigma0.llt().solve(c.cross.transpose()).transpose();
}

}  // namespace

SynthPath simulate(const SynthConfig& c) {
  validate(c);
  const Eigen::Index n = c.n_steps;
  const Eigen::Index k = c.m + c.d;
  const Matrix root = psd_sqrt(joint_diffusion(c), 0.0);
  const double sdt = std::sqrt(c.dt);

  SynthPath path;
  path.dt = c.dt;
  path.beta = implied_beta(c);
  path.alpha = c.mu - path.beta * c.eta - c.delta.cwiseProduct(c.theta);
  path.factor_levels.resize(n + 1, c.m);
  path.stock_levels.resize(n + 1, c.d);
  path.spreads.resize(n + 1, c.d);
  path.shocks.resize(n, k);
  path.factor_levels.row(0).setConstant(c.f0);
  path.stock_levels.row(0).setConstant(c.s0);
  path.spreads.row(0) = c.z0 ? c.z0->transpose() : c.theta.transpose();

  Philox rng(c.seed);
  Vector db(k);
  for (Eigen::Index t = 0; t < n; ++t) {
    for (Eigen::Index i = 0; i < k; ++i) db(i) = sdt * rng.normal();
    path.shocks.row(t) = db.transpose();
    const Vector e = root * db;
    const auto e0 = e.head(c.m);
    const auto e1 = e.tail(c.d);
    const Vector z = path.spreads.row(t).transpose();
    const Vector fr = c.eta * c.dt + e0;
    const Vector sr = (c.mu - c.delta.cwiseProduct(z)) * c.dt + e1;
    path.factor_levels.row(t + 1) = path.factor_levels.row(t).cwiseProduct((1.0 + fr.array()).matrix().transpose());
    path.stock_levels.row(t + 1) = path.stock_levels.row(t).cwiseProduct((1.0 + sr.array()).matrix().transpose());
    path.spreads.row(t + 1) =
        (z + c.delta.cwiseProduct(c.theta - z) * c.dt - path.beta * e0 + e1).transpose();
    if (!(path.factor_levels.row(t + 1).array() > 0.0).all() || !(path.stock_levels.row(t + 1).array() > 0.0).all()) {
      fail(ErrorKind::Numeric, "simulated level turned non-positive at step " + std::to_string(t + 1));
    }
  }
  return path;
}

std::vector<Date> business_days(Date start, std::size_t count) {
  std::vector<Date> out;
  out.reserve(count);
  Date day = start;
  while (out.size() < count) {
    const std::chrono::weekday wd{day};
    if (wd != std::chrono::Saturday && wd != std::chrono::Sunday) out.push_back(day);
    day += std::chrono::days{1};
  }
  return out;
}

PricePanel to_panel(const SynthPath& path, const std::vector<std::string>& tickers,
                    const std::optional<std::string>& benchmark, Date start) {
  if (static_cast<Eigen::Index>(tickers.size()) != path.stock_levels.cols()) {
    fail(ErrorKind::Dimension, "to_panel: need one ticker per simulated stock");
  }
  PricePanel panel;
  panel.dates = business_days(start, static_cast<std::size_t>(path.stock_levels.rows()));
  panel.tickers = tickers;
  panel.prices = path.stock_levels;
  if (benchmark) panel.benchmark = Benchmark{*benchmark, path.factor_levels.col(0)};
  return panel;
}

SynthConfig random_market(const MarketShape& shape, Eigen::Index n_steps, std::uint64_t seed) {
  const Eigen::Index d = shape.d;
  const Eigen::Index m = shape.m;
  if (d < 1 || m < 1) fail(ErrorKind::Config, "random_market: need d >= 1 and m >= 1");
  Philox rng(seed, 0x5EEDu);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform(); };

  SynthConfig c;
  c.d = d;
  c.m = m;
  c.n_steps = n_steps;
  c.seed = seed;

  Vector vol0(m);
  vol0(0) = uniform(0.14, 0.22);
  for (Eigen::Index j = 1; j < m; ++j) vol0(j) = uniform(0.05, 0.10);
  Matrix corr0 = Matrix::Identity(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) corr0(i, j) = corr0(j, i) = uniform(-0.2, 0.2);
  }
  c.sigma0 = vol0.asDiagonal() * corr0 * vol0.asDiagonal();
  if (min_eigenvalue(c.sigma0) <= 0.0) c.sigma0 = Matrix(vol0.cwiseAbs2().asDiagonal());

  c.eta = Vector::Constant(m, shape.r);
  c.eta(0) = uniform(0.05, 0.10);

  Matrix beta(d, m);
  for (Eigen::Index i = 0; i < d; ++i) {
    beta(i, 0) = uniform(0.6, 1.4);
    for (Eigen::Index j = 1; j < m; ++j) beta(i, j) = uniform(-0.6, 0.6);
  }

  Vector idio(d);
  for (Eigen::Index i = 0; i < d; ++i) idio(i) = uniform(0.15, 0.30);
  Matrix sigma3 = idio.cwiseAbs2().asDiagonal();

  const Eigen::Index fast = shape.cointegrated < 0 ? d : std::min(shape.cointegrated, d);
  c.delta.resize(d);
  c.theta.resize(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    c.delta(i) = i < fast ? uniform(shape.delta_lo, shape.delta_hi) : shape.slow_delta;
    c.theta(i) = uniform(-0.01, 0.01);
  }
  Vector alpha(d);
  for (Eigen::Index i = 0; i < d; ++i) alpha(i) = uniform(-0.02, 0.02);

  c.cross = beta * c.sigma0;
  c.sigma1 = symmetrized(beta * c.sigma0 * beta.transpose() + sigma3);
  c.mu = alpha + beta * c.eta + c.delta.cwiseProduct(c.theta);
  return c;
}

ModelParams model_from_config(const SynthConfig& c, double r, double gamma) {
  ModelInputs in;
  in.mu = c.mu.array() - r;
  in.theta = c.theta;
  in.delta = c.delta;
  in.sigma0 = c.sigma0;
  in.cross = c.cross;
  in.sigma1 = c.sigma1;
  in.r = r;
  in.gamma = gamma;
  in.eta = c.eta;
  return make_model(in);
}

SynthConfig config_from_model(const ModelParams& p, Eigen::Index n_steps, std::uint64_t seed, double dt) {
  SynthConfig c;
  c.d = p.d;
  c.m = p.m;
  c.eta = p.eta;
  c.mu = p.mu.array() + p.r;
  c.delta = p.delta;
  c.theta = p.theta;
  c.sigma0 = p.sigma0;
  c.sigma1 = p.sigma1;
  c.cross = p.cross;
  c.dt = dt;
  c.n_steps = n_steps;
  c.seed = seed;
  return c;
}

}  // namespace statarb
