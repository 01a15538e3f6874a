#include "support.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "statarb/cointegration.hpp"

namespace statarb::testing {

double weyl(long long t) {
  const double x = static_cast<double>(t) * 0.6180339887498949;
  return x - std::floor(x) - 0.5;
}

double uniform(Philox& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

Vector uniform_vector(Philox& rng, Eigen::Index n, double lo, double hi) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = uniform(rng, lo, hi);
  return v;
}

namespace {

Matrix random_joint(Philox& rng, Eigen::Index m, Eigen::Index d) {
  const Eigen::Index k = m + d;
  Matrix l(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) l(i, j) = rng.normal();
  }
  Matrix g = l * l.transpose() / static_cast<double>(k) + 0.05 * Matrix::Identity(k, k);
  const Vector s = g.diagonal().cwiseSqrt().cwiseInverse();
  Matrix corr = s.asDiagonal() * g * s.asDiagonal();
  Vector vol(k);
  for (Eigen::Index i = 0; i < m; ++i) vol(i) = uniform(rng, 0.10, 0.25);
  for (Eigen::Index i = m; i < k; ++i) vol(i) = uniform(rng, 0.20, 0.40);
  return symmetrized(vol.asDiagonal() * corr * vol.asDiagonal());
}

ModelInputs random_inputs(Philox& rng, Eigen::Index d, Eigen::Index m, double gamma, double r) {
  const Matrix g = random_joint(rng, m, d);
  ModelInputs in;
  in.sigma0 = g.topLeftCorner(m, m);
  in.cross = g.bottomLeftCorner(d, m);
  in.sigma1 = g.bottomRightCorner(d, d);
  in.delta = uniform_vector(rng, d, 2.0, 40.0);
  in.theta = uniform_vector(rng, d, -0.02, 0.02);
  in.mu = uniform_vector(rng, d, -0.05, 0.05);
  in.eta = uniform_vector(rng, m, 0.02, 0.10);
  in.r = r;
  in.gamma = gamma;
  return in;
}

}  // namespace

ModelParams random_model(Philox& rng, Eigen::Index d, Eigen::Index m, double gamma, double r) {
  return make_model(random_inputs(rng, d, m, gamma, r));
}

ModelParams scalar_delta_model(Philox& rng, Eigen::Index d, Eigen::Index m, double gamma) {
  ModelInputs in = random_inputs(rng, d, m, gamma, 0.01);
  in.delta = Vector::Constant(d, uniform(rng, 2.0, 40.0));
  return make_model(in);
}

ModelParams assembled_model(std::uint64_t seed, Eigen::Index d, Eigen::Index m, double gamma, double r) {
  for (std::uint64_t attempt = 0;; ++attempt) {
    MarketShape shape;
    shape.d = d;
    shape.m = m;
    const SynthConfig config = random_market(shape, 250, seed * 1000 + attempt);
    const SynthPath path = simulate(config);
    const Matrix f = path.factor_returns();
    const Matrix s = path.stock_returns();
    UniverseSelection sel;
    std::vector<Eigen::Index> cols;
    for (Eigen::Index i = 0; i < d; ++i) {
      CointegrationFit fit = fit_ticker("S" + std::to_string(i), s.col(i), f, config.dt);
      if (!fit.delta_hat || !(*fit.delta_hat > 0.0)) continue;
      sel.tickers.push_back(fit.ticker);
      sel.fits.push_back(fit);
      cols.push_back(i);
    }
    if (static_cast<Eigen::Index>(cols.size()) != d) continue;
    return assemble(sel, f, s, f.col(0).mean() / config.dt, r, gamma, config.dt);
  }
}

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("statarb_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::vector<Date> business_days_for_test(std::size_t count) {
  return business_days(Date{std::chrono::year{2020} / 1 / 2}, count);
}

}  // namespace statarb::testing
