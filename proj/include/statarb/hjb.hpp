#pragma once

#include <optional>
#include <string>
#include <vector>

#include "statarb/linalg.hpp"
#include "statarb/model.hpp"

namespace statarb {

enum class Variant { Unconstrained, Constrained };

const char* to_string(Variant v);

/// Coefficients of dC/dt = -A'C - CA - CQC - P.
struct RiccatiCoefficients {
  Matrix Q;
  Matrix A;
  Matrix P;
  Variant variant = Variant::Unconstrained;
};

/// sigma1^-1, or sigma1^-1 - sigma_c for the market-neutral problem.
Matrix precision_matrix(const ModelParams& params, Variant variant);

RiccatiCoefficients build_coefficients(const ModelParams& params, Variant variant);

Matrix riccati_rhs(const RiccatiCoefficients& coef, const Matrix& c);

/// || A'C + CA + CQC + P ||_F
double care_residual(const RiccatiCoefficients& coef, const Matrix& c);

/// Default step count: step <= min(1/delta_i) / 50.
int default_steps(const Vector& delta, double horizon);

struct RiccatiPath {
  std::vector<double> tau;  // time to maturity T - t of each sample
  std::vector<Matrix> C;
};

/// Backward RK4 from C(T) = 0. Every sample_every-th iterate is kept, plus both endpoints.
RiccatiPath integrate_riccati(const RiccatiCoefficients& coef, double horizon, int steps, int sample_every = 1);

struct CareOptions {
  double rel_tol = 1e-10;
  int max_iter = 100;
  std::optional<double> seed_horizon;  // years of backward integration for the Newton seed
};

struct CareResult {
  Matrix C;
  int iterations = 0;
  double residual = 0.0;
  double seed_horizon = 0.0;
};

CareResult care_steady_state(const RiccatiCoefficients& coef, const Vector& delta, const CareOptions& options = {});

struct BSteady {
  Vector b;
  Matrix R;
  Eigen::VectorXcd R_eigenvalues;
  bool positive_real_parts = false;
};

BSteady solve_b_steady(const ModelParams& params, Variant variant, const Matrix& c_bar);

/// Right-hand side of the a-equation at (b, C).
double a_rhs(const ModelParams& params, Variant variant, const Matrix& c, const Vector& b);

struct Growth {
  double L_bar = 0.0;
  double growth_rate = 0.0;  // -L_bar / gamma
};

Growth growth_constant(const ModelParams& params, const Matrix& c_bar, const Vector& b_bar, Variant variant);

struct CertificateReport {
  Variant variant = Variant::Unconstrained;
  double q_min_eig = 0.0;
  double q_max_eig = 0.0;
  double minus_p_min_eig = 0.0;
  double minus_p_max_eig = 0.0;
  bool q_positive_definite = false;
  bool minus_p_psd = false;
  Eigen::Index controllability_rank = 0;  // of (A', E'), E'E = -P
  Eigen::Index d = 0;
  bool observable = false;
  bool stabilisable = false;  // Q > 0 makes (A, Q^{1/2}) controllable
  std::optional<StabilityPreReport> rank_conditions;  // constrained only
  bool steady_state_guaranteed = false;
  std::vector<std::string> notes;
};

CertificateReport stability_certificate(const RiccatiCoefficients& coef, const ModelParams& params);

struct HjbPaths {
  std::vector<double> tau;
  std::vector<Matrix> C;
  std::vector<Vector> b;
  std::vector<double> a;
};

/// Joint backward RK4 for (a, b, C) from zero terminal values; diagnostics only.
HjbPaths integrate_hjb_system(const ModelParams& params, Variant variant, double horizon, int steps,
                              int sample_every = 1);

struct HjbOptions {
  CareOptions care;
  bool keep_paths = false;
  double path_horizon = 0.0;  // 0 picks 100 slowest reversion times
  int path_steps = 0;
};

struct HJBSolution {
  Variant variant = Variant::Unconstrained;
  Matrix C_bar;
  Vector b_bar;
  double L_bar = 0.0;
  double growth_rate = 0.0;
  int care_iterations = 0;
  double care_residual = 0.0;
  double seed_horizon = 0.0;
  Eigen::VectorXcd R_eigenvalues;
  CertificateReport certificate;
  std::optional<HjbPaths> paths;
};

HJBSolution solve_hjb(const ModelParams& params, Variant variant, const HjbOptions& options = {});

}  // namespace statarb
