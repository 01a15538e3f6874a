#include "statarb/model.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "statarb/error.hpp"

namespace statarb {

Matrix ModelParams::sigma1_inverse() const { return spd_inverse(sigma1); }

namespace {

void require_shape(const Matrix& a, Eigen::Index rows, Eigen::Index cols, const char* name) {
  if (a.rows() != rows || a.cols() != cols) {
    fail(ErrorKind::Dimension, std::string(name) + " must be " + std::to_string(rows) + "x" +
                                   std::to_string(cols) + ", got " + std::to_string(a.rows()) + "x" +
                                   std::to_string(a.cols()));
  }
}

void require_symmetric(const Matrix& a, const char* name) {
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if (asymmetry(a) > 1e-12 * scale) fail(ErrorKind::Shape, std::string(name) + " is not symmetric");
}

}  // namespace

ModelParams make_model(const ModelInputs& in) {
  const Eigen::Index d = in.mu.size();
  const Eigen::Index m = in.eta.size();
  if (d < 1) fail(ErrorKind::Dimension, "model needs at least one stock");
  if (m < 1) fail(ErrorKind::Dimension, "model needs at least one factor");
  if (in.theta.size() != d || in.delta.size() != d) {
    fail(ErrorKind::Dimension, "mu, theta and delta must share length d");
  }
  require_shape(in.sigma0, m, m, "sigma0");
  require_shape(in.sigma1, d, d, "sigma1");
  require_shape(in.cross, d, m, "cross");
  if (!(in.gamma < 0.0)) fail(ErrorKind::UnsupportedRegime, "gamma must be negative");
  if (!(in.delta.array() > 0.0).all()) fail(ErrorKind::Config, "delta entries must be positive");
  require_symmetric(in.sigma0, "sigma0");
  require_symmetric(in.sigma1, "sigma1");

  ModelParams p;
  p.d = d;
  p.m = m;
  p.mu = in.mu;
  p.theta = in.theta;
  p.delta = in.delta;
  p.sigma0 = symmetrized(in.sigma0);
  p.sigma1 = symmetrized(in.sigma1);
  p.cross = in.cross;
  p.r = in.r;
  p.gamma = in.gamma;
  p.eta = in.eta;

  Eigen::LLT<Matrix> llt0(p.sigma0);
  if (llt0.info() != Eigen::Success) fail(ErrorKind::Conditioning, "sigma0 is not positive definite");
  Eigen::LLT<Matrix> llt1(p.sigma1);
  if (llt1.info() != Eigen::Success) fail(ErrorKind::Conditioning, "sigma1 is not positive definite");

  p.beta = llt0.solve(p.cross.transpose()).transpose();
  const Matrix cb = p.cross * p.beta.transpose();
  p.sigma2 = p.sigma1 - cb;
  p.sigma3 = symmetrized(p.sigma1 - cb - cb.transpose() + p.beta * p.sigma0 * p.beta.transpose());
  const double s3_min = min_eigenvalue(p.sigma3);
  if (s3_min < -1e-10 * std::max(1.0, p.sigma1.norm())) {
    fail(ErrorKind::Config, "joint diffusion [[sigma0, cross'], [cross, sigma1]] is not positive semi-definite "
                            "(min eigenvalue of sigma3 = " + std::to_string(s3_min) + ")");
  }

  const Matrix w = llt1.solve(p.beta);  // sigma1^-1 beta
  const Matrix g = symmetrized(p.beta.transpose() * w);
  Eigen::SelfAdjointEigenSolver<Matrix> es(g);
  const Vector ev = es.eigenvalues();
  const double top = ev.size() ? ev.maxCoeff() : 0.0;
  const double cut = 1e-12 * std::max(top, 1e-300);
  p.sigma_c_defined = top > 0.0 && ev.minCoeff() > cut;
  Vector inv_ev(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) inv_ev(i) = ev(i) > cut && top > 0.0 ? 1.0 / ev(i) : 0.0;
  const Matrix g_pinv = es.eigenvectors() * inv_ev.asDiagonal() * es.eigenvectors().transpose();
  p.sigma_c = symmetrized(w * g_pinv * w.transpose());
  if (!p.sigma_c_defined) {
    p.warnings.push_back("beta has rank below m; sigma_c built from a pseudo-inverse");
  }
  if (d < m) {
    p.warnings.push_back("constrained-infeasible: fewer stocks (" + std::to_string(d) + ") than factors (" +
                         std::to_string(m) + ")");
  }
  return p;
}

ShrinkageResult ledoit_wolf(const Matrix& observations) {
  const Eigen::Index n = observations.rows();
  const Eigen::Index p = observations.cols();
  if (n < 2) fail(ErrorKind::InsufficientData, "ledoit_wolf: need at least 2 observations");
  const Matrix x = observations.rowwise() - observations.colwise().mean();
  const double nn = static_cast<double>(n);
  const double pp = static_cast<double>(p);
  const Matrix s = x.transpose() * x / nn;
  ShrinkageResult out;
  const double mu = s.trace() / pp;
  if (p == 1) {
    out.cov = s;
    return out;
  }
  const Matrix x2 = x.cwiseProduct(x);
  const double beta_sum = (x2.transpose() * x2).sum();
  const double delta_sum = s.squaredNorm();
  double beta = (beta_sum / nn - delta_sum) / (pp * nn);
  const double delta = (delta_sum - 2.0 * mu * s.trace() + pp * mu * mu) / pp;
  beta = std::min(beta, delta);
  out.intensity = (beta <= 0.0 || delta <= 0.0) ? 0.0 : beta / delta;
  out.cov = (1.0 - out.intensity) * s;
  out.cov.diagonal().array() += out.intensity * mu;
  return out;
}

double ledoit_wolf_intensity(const Matrix& sample_cov, Eigen::Index n_obs) {
  if (sample_cov.rows() != sample_cov.cols()) fail(ErrorKind::Shape, "ledoit_wolf_shrink: matrix is not square");
  require_symmetric(sample_cov, "sample covariance");
  if (n_obs < 2) fail(ErrorKind::InsufficientData, "ledoit_wolf_shrink: need n_obs >= 2");
  const double p = static_cast<double>(sample_cov.rows());
  const double nu = sample_cov.trace() / p;
  Matrix gap = sample_cov;
  gap.diagonal().array() -= nu;
  const double d2 = gap.squaredNorm() / p;
  if (!(d2 > 0.0)) return 0.0;
  const double tr = sample_cov.trace();
  const double b2 = (tr * tr + sample_cov.squaredNorm()) / (p * static_cast<double>(n_obs));
  return std::min(b2, d2) / d2;
}

Matrix ledoit_wolf_shrink(const Matrix& sample_cov, Eigen::Index n_obs) {
  const double rho = ledoit_wolf_intensity(sample_cov, n_obs);
  const double nu = sample_cov.trace() / static_cast<double>(sample_cov.rows());
  Matrix out = (1.0 - rho) * symmetrized(sample_cov);
  out.diagonal().array() += rho * nu;
  return out;
}

ModelParams assemble(const UniverseSelection& selection, const Matrix& factor_returns,
                     const Matrix& stock_returns, double eta1, double r, double gamma, double dt,
                     const ShrinkageConfig& shrinkage) {
  if (selection.tickers.empty()) fail(ErrorKind::InsufficientData, "assemble: empty selection");
  if (!(gamma < 0.0)) fail(ErrorKind::UnsupportedRegime, "gamma must be negative");
  const Eigen::Index d = static_cast<Eigen::Index>(selection.tickers.size());
  const Eigen::Index m = factor_returns.cols();
  if (stock_returns.cols() != d) fail(ErrorKind::Dimension, "assemble: stock columns differ from selection size");
  if (stock_returns.rows() != factor_returns.rows()) fail(ErrorKind::Dimension, "assemble: window lengths differ");
  if (m < 1) fail(ErrorKind::Dimension, "assemble: no factors");

  Matrix s0, s1;
  double rho0 = 0.0, rho1 = 0.0;
  if (shrinkage.enabled) {
    ShrinkageResult f = ledoit_wolf(factor_returns);
    ShrinkageResult s = ledoit_wolf(stock_returns);
    s0 = f.cov;
    s1 = s.cov;
    rho0 = f.intensity;
    rho1 = s.intensity;
  } else {
    s0 = covariance(factor_returns);
    s1 = covariance(stock_returns);
  }
  // cross block scaled by sqrt((1-rho0)(1-rho1))
  const Matrix cross = std::sqrt((1.0 - rho0) * (1.0 - rho1)) * cross_covariance(stock_returns, factor_returns);

  ModelInputs in;
  in.sigma0 = s0 / dt;
  in.sigma1 = s1 / dt;
  in.cross = cross / dt;
  in.r = r;
  in.gamma = gamma;
  in.eta = Vector::Constant(m, r);
  in.eta(0) = eta1;
  in.theta.resize(d);
  in.delta.resize(d);
  in.mu.resize(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const auto& fit = selection.fits[static_cast<std::size_t>(i)];
    if (!fit.delta_hat || !(*fit.delta_hat > 0.0)) {
      fail(ErrorKind::Data, "assemble: " + fit.ticker + " has no positive mean-reversion speed");
    }
    in.theta(i) = fit.theta_hat;
    in.delta(i) = *fit.delta_hat;
  }

  Eigen::LLT<Matrix> llt1(symmetrized(in.sigma1));
  if (llt1.info() != Eigen::Success) fail(ErrorKind::Conditioning, "sigma1 is not positive definite");

  Eigen::LLT<Matrix> llt0(symmetrized(in.sigma0));
  if (llt0.info() != Eigen::Success) fail(ErrorKind::Conditioning, "sigma0 is not positive definite");
  const Matrix beta = llt0.solve(in.cross.transpose()).transpose();
  for (Eigen::Index i = 0; i < d; ++i) {
    const auto& fit = selection.fits[static_cast<std::size_t>(i)];
    in.mu(i) = in.delta(i) * in.theta(i) + fit.alpha + beta.row(i).dot(in.eta) - r;
  }

  ModelParams p = make_model(in);
  p.tickers = selection.tickers;
  p.factor_shrinkage = rho0;
  p.stock_shrinkage = rho1;
  p.beta_ols.resize(d, m);
  for (Eigen::Index i = 0; i < d; ++i) {
    const auto& row = selection.fits[static_cast<std::size_t>(i)].beta_row;
    if (row.size() == m) p.beta_ols.row(i) = row.transpose();
    else p.beta_ols.row(i).setConstant(std::nan(""));
  }
  p.beta_deviation = (p.beta_ols - p.beta).norm();
  return p;
}

StabilityPreReport validate_stability_preconditions(const ModelParams& params) {
  StabilityPreReport rep;
  rep.d = params.d;
  rep.m = params.m;
  const Matrix& beta = params.beta;
  const Matrix delta = params.delta_matrix();
  const Matrix btb = beta.transpose() * beta;
  const double bscale = beta.norm();
  rep.rank_btb = numeric_rank(btb, 1e-10);
  if (bscale == 0.0) rep.rank_btb = 0;
  const double dmax = params.delta.maxCoeff();
  const double dmin = params.delta.minCoeff();
  rep.delta_proportional_identity = (dmax - dmin) <= 1e-12 * std::max(std::abs(dmax), 1e-300);
  if (rep.rank_btb == params.m) {
    const Matrix proj = beta * btb.ldlt().solve(beta.transpose());
    const Matrix pd = delta - proj * delta;
    rep.rank_projected_delta = numeric_rank(pd, 1e-10, delta.norm());
    const Matrix db = delta * beta;
    rep.rank_projected_delta_beta = numeric_rank(db - proj * db, 1e-10, db.norm());
    std::vector<bool> done(static_cast<std::size_t>(params.d), false);
    for (Eigen::Index i = 0; i < params.d && !rep.beta_meets_delta_eigenspace; ++i) {
      if (done[static_cast<std::size_t>(i)]) continue;
      std::vector<Eigen::Index> group;
      for (Eigen::Index j = i; j < params.d; ++j) {
        if (std::abs(params.delta(j) - params.delta(i)) <= 1e-12 * std::max(std::abs(dmax), 1e-300)) {
          group.push_back(j);
          done[static_cast<std::size_t>(j)] = true;
        }
      }
      const Eigen::Index k = static_cast<Eigen::Index>(group.size());
      Matrix stacked = Matrix::Zero(params.d, params.m + k);
      stacked.leftCols(params.m) = beta / bscale;
      for (Eigen::Index g = 0; g < k; ++g) stacked(group[static_cast<std::size_t>(g)], params.m + g) = 1.0;
      if (numeric_rank(stacked, 1e-10) < params.m + k) rep.beta_meets_delta_eigenspace = true;
    }
  }
  rep.sigma1_min_eig = min_eigenvalue(params.sigma1);
  rep.sigma1_max_eig = max_eigenvalue(params.sigma1);
  rep.sigma3_min_eig = min_eigenvalue(params.sigma3);
  rep.sigma3_max_eig = max_eigenvalue(params.sigma3);
  rep.condition_violated =
      rep.rank_btb < params.m || rep.delta_proportional_identity || rep.beta_meets_delta_eigenspace;
  return rep;
}

}  // namespace statarb
