#include "statarb/hjb.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>

#include "statarb/error.hpp"

namespace statarb {

const char* to_string(Variant v) {
  return v == Variant::Unconstrained ? "unconstrained" : "constrained";
}

Matrix precision_matrix(const ModelParams& params, Variant variant) {
  Matrix m = params.sigma1_inverse();
  if (variant == Variant::Constrained) m = symmetrized(m - params.sigma_c);
  return m;
}

namespace {

bool all_finite(const Matrix& a) { return a.allFinite(); }

}  // namespace

RiccatiCoefficients build_coefficients(const ModelParams& params, Variant variant) {
  if (!(params.gamma < 0.0)) fail(ErrorKind::UnsupportedRegime, "gamma must be negative");
  const double g = params.gamma;
  const double k = g / (1.0 - g);
  const Matrix mm = precision_matrix(params, variant);
  const Matrix delta = params.delta_matrix();
  const Matrix s2tm = params.sigma2.transpose() * mm;
  RiccatiCoefficients c;
  c.variant = variant;
  c.Q = symmetrized(2.0 * k * s2tm * params.sigma2 + 2.0 * params.sigma3);
  c.A = -k * s2tm * delta - delta;
  c.P = symmetrized(0.5 * k * delta * mm * delta);
  if (!all_finite(c.Q) || !all_finite(c.A) || !all_finite(c.P)) {
    fail(ErrorKind::Numeric, "Riccati coefficients are not finite");
  }
  return c;
}

Matrix riccati_rhs(const RiccatiCoefficients& coef, const Matrix& c) {
  return -coef.A.transpose() * c - c * coef.A - c * coef.Q * c - coef.P;
}

double care_residual(const RiccatiCoefficients& coef, const Matrix& c) {
  return riccati_rhs(coef, c).norm();
}

int default_steps(const Vector& delta, double horizon) {
  const double fastest = delta.size() ? delta.maxCoeff() : 1.0;
  const double steps = std::ceil(horizon * 50.0 * std::max(fastest, 1e-12));
  return static_cast<int>(std::clamp(steps, 1.0, 1e9));
}

RiccatiPath integrate_riccati(const RiccatiCoefficients& coef, double horizon, int steps, int sample_every) {
  if (!(horizon > 0.0)) fail(ErrorKind::Config, "integrate_riccati: horizon must be positive");
  if (steps < 1) fail(ErrorKind::Config, "integrate_riccati: steps must be at least 1");
  sample_every = std::max(sample_every, 1);
  const Eigen::Index d = coef.A.rows();
  const double h = horizon / steps;
  // in time to maturity tau = T - t the equation runs forward: dC/dtau = -rhs
  auto g = [&](const Matrix& c) -> Matrix { return -riccati_rhs(coef, c); };
  RiccatiPath path;
  Matrix c = Matrix::Zero(d, d);
  path.tau.push_back(0.0);
  path.C.push_back(c);
  for (int s = 1; s <= steps; ++s) {
    const Matrix k1 = g(c);
    const Matrix k2 = g(c + 0.5 * h * k1);
    const Matrix k3 = g(c + 0.5 * h * k2);
    const Matrix k4 = g(c + h * k3);
    c = symmetrized(c + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
    if (!c.allFinite() || c.norm() > 1e150) {
      fail(ErrorKind::Divergence, "Riccati integration blew up at step " + std::to_string(s) + " of " +
                                      std::to_string(steps) + " (is Q positive definite?)");
    }
    if (s % sample_every == 0 || s == steps) {
      path.tau.push_back(h * s);
      path.C.push_back(c);
    }
  }
  return path;
}

CareResult care_steady_state(const RiccatiCoefficients& coef, const Vector& delta, const CareOptions& options) {
  const Eigen::Index d = coef.A.rows();
  const double pnorm = coef.P.norm();
  const double tol = options.rel_tol * (1.0 + pnorm);
  CareResult out;
  if (pnorm == 0.0) {
    out.C = Matrix::Zero(d, d);
    return out;
  }

  const double slow = 1.0 / std::max(delta.minCoeff(), 1e-12);
  double horizon = options.seed_horizon.value_or(20.0 * slow);
  Matrix c;
  for (int attempt = 0;; ++attempt) {
    RiccatiPath seed = integrate_riccati(coef, horizon, default_steps(delta, horizon), std::numeric_limits<int>::max());
    c = seed.C.back();
    if (is_hurwitz(coef.A + coef.Q * c) || attempt >= 4) break;
    horizon *= 4.0;
  }
  out.seed_horizon = horizon;

  double best = care_residual(coef, c);
  Matrix best_c = c;
  int since_improvement = 0;
  for (int it = 0; it < options.max_iter; ++it) {
    if (best == 0.0) break;
    // Newton step in correction form
    const Matrix closed = coef.A + coef.Q * c;
    Matrix next;
    try {
      next = symmetrized(c + solve_lyapunov(closed, symmetrized(riccati_rhs(coef, c))));
    } catch (const Error& e) {
      fail(ErrorKind::Convergence, std::string("Newton-Kleinman Lyapunov step failed: ") + e.what() +
                                       "; best residual " + std::to_string(best));
    }
    c = next;
    ++out.iterations;
    const double res = care_residual(coef, c);
    if (!std::isfinite(res)) break;
    if (res < best) {
      since_improvement = res < 0.5 * best ? 0 : since_improvement + 1;
      best = res;
      best_c = c;
    } else {
      ++since_improvement;
    }
    if (since_improvement >= 3) break;
  }
  out.C = best_c;
  out.residual = best;
  if (best > tol) {
    // roundoff floor: accept within the solution-quality bound, otherwise report stagnation
    if (best > 1e-8 * (1.0 + pnorm)) {
      fail(ErrorKind::Convergence, "Newton-Kleinman stagnated after " + std::to_string(out.iterations) +
                                       " iterations; best residual " + std::to_string(best));
    }
  }
  return out;
}

namespace {

struct SteadyTerms {
  Matrix mm;
  Matrix delta;
  double k = 0.0;  // gamma / (1 - gamma)
};

SteadyTerms steady_terms(const ModelParams& params, Variant variant) {
  SteadyTerms t;
  t.mm = precision_matrix(params, variant);
  t.delta = params.delta_matrix();
  t.k = params.gamma / (1.0 - params.gamma);
  return t;
}

Matrix b_matrix(const RiccatiCoefficients& coef, const Matrix& c) { return -c * coef.Q - coef.A.transpose(); }

Vector b_forcing(const ModelParams& p, const SteadyTerms& t, const Matrix& c) {
  const Vector mmu = t.mm * p.mu;
  return -c * (2.0 * t.k * p.sigma2.transpose() * mmu + 2.0 * t.delta * p.theta) + t.k * t.delta * mmu;
}

}  // namespace

BSteady solve_b_steady(const ModelParams& params, Variant variant, const Matrix& c_bar) {
  const RiccatiCoefficients coef = build_coefficients(params, variant);
  const SteadyTerms t = steady_terms(params, variant);
  BSteady out;
  out.R = b_matrix(coef, c_bar);
  const Vector f = b_forcing(params, t, c_bar);
  Eigen::FullPivLU<Matrix> lu(out.R);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) fail(ErrorKind::DegenerateSteadyState, "steady-state b matrix is singular");
  out.b = -lu.solve(f);
  if (!out.b.allFinite()) fail(ErrorKind::DegenerateSteadyState, "steady-state b is not finite");
  Eigen::EigenSolver<Matrix> es(out.R, false);
  out.R_eigenvalues = es.eigenvalues();
  out.positive_real_parts = (out.R_eigenvalues.real().array() > 0.0).all();
  return out;
}

double a_rhs(const ModelParams& p, Variant variant, const Matrix& c, const Vector& b) {
  const SteadyTerms t = steady_terms(p, variant);
  const double k2 = 0.5 * t.k;
  const Matrix s2 = p.sigma2;
  const Vector mmu = t.mm * p.mu;
  const Vector s2b = s2 * b;
  double l = -(k2 * s2b.dot(t.mm * s2b) + 0.5 * b.dot(p.sigma3 * b));
  l -= k2 * 2.0 * s2b.dot(mmu);
  l -= p.theta.dot(t.delta * b);
  l -= k2 * p.mu.dot(mmu);
  l -= (p.sigma3 * c).trace();
  l -= p.r * p.gamma;
  return l;
}

Growth growth_constant(const ModelParams& params, const Matrix& c_bar, const Vector& b_bar, Variant variant) {
  Growth g;
  g.L_bar = a_rhs(params, variant, c_bar, b_bar);
  g.growth_rate = -g.L_bar / params.gamma;
  return g;
}

CertificateReport stability_certificate(const RiccatiCoefficients& coef, const ModelParams& params) {
  CertificateReport rep;
  rep.variant = coef.variant;
  rep.d = coef.A.rows();
  Eigen::SelfAdjointEigenSolver<Matrix> qs(symmetrized(coef.Q), Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<Matrix> ps(symmetrized(-coef.P), Eigen::EigenvaluesOnly);
  rep.q_min_eig = qs.eigenvalues().minCoeff();
  rep.q_max_eig = qs.eigenvalues().maxCoeff();
  rep.minus_p_min_eig = ps.eigenvalues().minCoeff();
  rep.minus_p_max_eig = ps.eigenvalues().maxCoeff();
  rep.q_positive_definite = rep.q_min_eig > 0.0;
  const double pscale = std::max(std::abs(rep.minus_p_max_eig), 1e-300);
  rep.minus_p_psd = rep.minus_p_min_eig >= -1e-10 * pscale;

  const Matrix e = psd_sqrt(-coef.P, 1e-12 * pscale);
  rep.controllability_rank = controllable_dimension(coef.A.transpose(), e.transpose());
  rep.observable = rep.controllability_rank == rep.d;
  rep.stabilisable = rep.q_positive_definite;
  if (!rep.observable) rep.notes.push_back("(E, A) is not observable");
  if (!rep.q_positive_definite) rep.notes.push_back("Q is not positive definite");

  if (coef.variant == Variant::Constrained) {
    rep.rank_conditions = validate_stability_preconditions(params);
    if (rep.rank_conditions->delta_proportional_identity) {
      rep.notes.push_back("delta is proportional to the identity");
    }
    if (rep.rank_conditions->rank_btb < params.m) rep.notes.push_back("beta'beta is rank deficient");
    if (rep.rank_conditions->beta_meets_delta_eigenspace) {
      rep.notes.push_back("span(beta) contains an eigenvector of delta");
    }
  }
  rep.steady_state_guaranteed = rep.q_positive_definite && rep.minus_p_psd && rep.observable &&
                                !(rep.rank_conditions && rep.rank_conditions->condition_violated);
  return rep;
}

HjbPaths integrate_hjb_system(const ModelParams& params, Variant variant, double horizon, int steps,
                              int sample_every) {
  if (!(horizon > 0.0) || steps < 1) fail(ErrorKind::Config, "integrate_hjb_system: bad horizon or steps");
  sample_every = std::max(sample_every, 1);
  const RiccatiCoefficients coef = build_coefficients(params, variant);
  const SteadyTerms t = steady_terms(params, variant);
  const Eigen::Index d = params.d;
  const double h = horizon / steps;

  struct State {
    Matrix c;
    Vector b;
    double a;
  };
  auto deriv = [&](const State& s) -> State {
    State out;
    out.c = -riccati_rhs(coef, s.c);
    out.b = -(b_matrix(coef, s.c) * s.b + b_forcing(params, t, s.c));
    out.a = -a_rhs(params, variant, s.c, s.b);
    return out;
  };
  auto axpy = [](const State& s, double w, const State& k) {
    return State{s.c + w * k.c, s.b + w * k.b, s.a + w * k.a};
  };

  HjbPaths paths;
  State s{Matrix::Zero(d, d), Vector::Zero(d), 0.0};
  paths.tau.push_back(0.0);
  paths.C.push_back(s.c);
  paths.b.push_back(s.b);
  paths.a.push_back(s.a);
  for (int i = 1; i <= steps; ++i) {
    const State k1 = deriv(s);
    const State k2 = deriv(axpy(s, 0.5 * h, k1));
    const State k3 = deriv(axpy(s, 0.5 * h, k2));
    const State k4 = deriv(axpy(s, h, k3));
    s.c = symmetrized(s.c + (h / 6.0) * (k1.c + 2.0 * k2.c + 2.0 * k3.c + k4.c));
    s.b = s.b + (h / 6.0) * (k1.b + 2.0 * k2.b + 2.0 * k3.b + k4.b);
    s.a = s.a + (h / 6.0) * (k1.a + 2.0 * k2.a + 2.0 * k3.a + k4.a);
    if (!s.c.allFinite() || !s.b.allFinite() || !std::isfinite(s.a)) {
      fail(ErrorKind::Divergence, "HJB system integration blew up at step " + std::to_string(i));
    }
    if (i % sample_every == 0 || i == steps) {
      paths.tau.push_back(h * i);
      paths.C.push_back(s.c);
      paths.b.push_back(s.b);
      paths.a.push_back(s.a);
    }
  }
  return paths;
}

HJBSolution solve_hjb(const ModelParams& params, Variant variant, const HjbOptions& options) {
  const RiccatiCoefficients coef = build_coefficients(params, variant);
  HJBSolution sol;
  sol.variant = variant;
  sol.certificate = stability_certificate(coef, params);
  CareResult care = care_steady_state(coef, params.delta, options.care);
  sol.C_bar = care.C;
  sol.care_iterations = care.iterations;
  sol.care_residual = care.residual;
  sol.seed_horizon = care.seed_horizon;
  BSteady b = solve_b_steady(params, variant, sol.C_bar);
  sol.b_bar = b.b;
  sol.R_eigenvalues = b.R_eigenvalues;
  Growth g = growth_constant(params, sol.C_bar, sol.b_bar, variant);
  sol.L_bar = g.L_bar;
  sol.growth_rate = g.growth_rate;
  if (options.keep_paths) {
    const double horizon = options.path_horizon > 0.0 ? options.path_horizon
                                                      : 100.0 / std::max(params.delta.minCoeff(), 1e-12);
    const int steps = options.path_steps > 0 ? options.path_steps : default_steps(params.delta, horizon);
    sol.paths = integrate_hjb_system(params, variant, horizon, steps, std::max(1, steps / 1000));
  }
  return sol;
}

}  // namespace statarb
