#pragma once

#include <string>
#include <vector>

#include "statarb/cointegration.hpp"
#include "statarb/linalg.hpp"

namespace statarb {

/// Drift, spread and diffusion parameters of the factor/spread market plus the
/// derived matrices used by the Riccati coefficients. All rates are per year.
struct ModelParams {
  Eigen::Index d = 0;
  Eigen::Index m = 0;
  Vector mu;      // excess drift, mu^i - r
  Vector theta;
  Vector delta;   // diagonal of the mean-reversion matrix
  Matrix beta;    // d x m
  Matrix sigma0;  // m x m
  Matrix cross;   // d x m
  Matrix sigma1;  // d x d
  Matrix sigma2;
  Matrix sigma3;
  Matrix sigma_c;
  double r = 0.0;
  double gamma = -1.0;
  Vector eta;     // m factor drifts

  bool sigma_c_defined = true;
  std::vector<std::string> tickers;
  std::vector<std::string> warnings;

  Matrix beta_ols;          // per-stock regression loadings, when assembled from data
  double beta_deviation = 0.0;
  double factor_shrinkage = 0.0;
  double stock_shrinkage = 0.0;

  Matrix delta_matrix() const { return delta.asDiagonal(); }
  Matrix sigma1_inverse() const;
};

struct ModelInputs {
  Vector mu;
  Vector theta;
  Vector delta;
  Matrix sigma0;
  Matrix cross;
  Matrix sigma1;
  double r = 0.0;
  double gamma = -1.0;
  Vector eta;
};

/// Derives beta, sigma2, sigma3 and sigma_c from the primitive inputs and validates them.
ModelParams make_model(const ModelInputs& in);

struct ShrinkageConfig {
  bool enabled = true;
};

struct ShrinkageResult {
  Matrix cov;
  double intensity = 0.0;
};

/// Ledoit-Wolf shrinkage toward trace(S)/d * I from raw observations (rows), S with divisor n.
ShrinkageResult ledoit_wolf(const Matrix& observations);

/// Same target from a sample covariance alone; the estimation-noise term is
/// taken from its Gaussian moment, (tr(S)^2 + ||S||_F^2) / n.
Matrix ledoit_wolf_shrink(const Matrix& sample_cov, Eigen::Index n_obs);
double ledoit_wolf_intensity(const Matrix& sample_cov, Eigen::Index n_obs);

/// factor_returns and stock_returns are per-period, rows aligned; stock columns
/// follow selection.tickers.
ModelParams assemble(const UniverseSelection& selection, const Matrix& factor_returns,
                     const Matrix& stock_returns, double eta1, double r, double gamma, double dt,
                     const ShrinkageConfig& shrinkage = {});

struct StabilityPreReport {
  Eigen::Index d = 0;
  Eigen::Index m = 0;
  Eigen::Index rank_btb = 0;
  /// rank of delta - beta (beta'beta)^-1 beta' delta; never exceeds d - m.
  Eigen::Index rank_projected_delta = 0;
  /// rank of (I - beta (beta'beta)^-1 beta') delta beta, full (= m) when delta beta leaves span(beta).
  Eigen::Index rank_projected_delta_beta = 0;
  bool delta_proportional_identity = false;
  /// Some nonzero beta x is an eigenvector of delta.
  bool beta_meets_delta_eigenspace = false;
  double sigma1_min_eig = 0.0;
  double sigma1_max_eig = 0.0;
  double sigma3_min_eig = 0.0;
  double sigma3_max_eig = 0.0;
  bool condition_violated = false;
};

StabilityPreReport validate_stability_preconditions(const ModelParams& params);

}  // namespace statarb
