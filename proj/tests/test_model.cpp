#include <doctest.h>

#include <cmath>

#include "statarb/error.hpp"
#include "statarb/model.hpp"
#include "statarb/rng.hpp"
#include "support.hpp"

using namespace statarb;

namespace {

ModelInputs scalar_inputs() {
  ModelInputs in;
  in.mu = Vector::Constant(1, 0.02);
  in.theta = Vector::Zero(1);
  in.delta = Vector::Constant(1, 5.0);
  in.eta = Vector::Constant(1, 0.05);
  in.sigma0 = Matrix::Constant(1, 1, 0.04);
  in.cross = Matrix::Constant(1, 1, 0.032);
  in.sigma1 = Matrix::Constant(1, 1, 0.09);
  in.gamma = -2.0;
  in.r = 0.01;
  return in;
}

ErrorKind kind_of(const ModelInputs& in) {
  try {
    make_model(in);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Io;
}

}  // namespace

TEST_CASE("scalar derived blocks") {
  const auto p = make_model(scalar_inputs());
  CHECK(p.beta(0, 0) == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(p.sigma2(0, 0) == doctest::Approx(0.09 - 0.0256).epsilon(1e-14));
  CHECK(p.sigma3(0, 0) == doctest::Approx(0.09 - 0.0512 + 0.0256).epsilon(1e-14));
}

TEST_CASE("zero loadings leave sigma_c zero and flagged") {
  ModelInputs in = scalar_inputs();
  in.cross.setZero();
  const auto p = make_model(in);
  CHECK(p.sigma2 == p.sigma1);
  CHECK(p.sigma3 == p.sigma1);
  CHECK_FALSE(p.sigma_c_defined);
  CHECK(p.sigma_c.norm() == 0.0);
  CHECK_FALSE(p.warnings.empty());
}

TEST_CASE("input validation") {
  ModelInputs in = scalar_inputs();
  in.gamma = 0.5;
  CHECK(kind_of(in) == ErrorKind::UnsupportedRegime);
  in = scalar_inputs();
  in.delta(0) = 0.0;
  CHECK(kind_of(in) == ErrorKind::Config);
  in = scalar_inputs();
  in.cross(0, 0) = 0.1;  // cross^2 > sigma0 sigma1
  CHECK(kind_of(in) == ErrorKind::Config);
  in = scalar_inputs();
  in.theta = Vector::Zero(2);
  CHECK(kind_of(in) == ErrorKind::Dimension);
  in = scalar_inputs();
  in.sigma1(0, 0) = -1.0;
  CHECK(kind_of(in) == ErrorKind::Conditioning);
}

TEST_CASE("constrained precision annihilates beta") {
  Philox rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index d = 2 + trial % 9;
    const Eigen::Index m = 1 + trial % std::min<Eigen::Index>(d, 4);
    const auto p = testing::random_model(rng, d, m, -5.0);
    const Matrix lhs = p.beta.transpose() * (p.sigma1_inverse() - p.sigma_c);
    CHECK(lhs.cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("ledoit-wolf matches the reference implementation") {
  Matrix x(60, 4);
  for (Eigen::Index t = 0; t < 60; ++t) {
    for (Eigen::Index j = 0; j < 4; ++j) x(t, j) = testing::weyl(7 * t + 3 * j + 1) + 0.3 * testing::weyl(t + 1);
  }
  const auto lw = ledoit_wolf(x);
  CHECK(lw.intensity == doctest::Approx(0.22799964802902056).epsilon(1e-10));
  CHECK(lw.cov(0, 0) == doctest::Approx(0.09011709480252816).epsilon(1e-10));
  CHECK(lw.cov(0, 1) == doctest::Approx(0.030205151544828685).epsilon(1e-10));
}

TEST_CASE("shrinkage from a sample covariance") {
  const Matrix s = 0.3 * Matrix::Identity(3, 3);
  CHECK((ledoit_wolf_shrink(s, 50) - s).norm() < 1e-15);

  Matrix c(3, 3);
  c << 1.0, 0.3, 0.1, 0.3, 2.0, -0.2, 0.1, -0.2, 1.5;
  CHECK(ledoit_wolf_intensity(c, 1000000) < 1e-3);
  CHECK((ledoit_wolf_shrink(c, 1000000) - c).norm() < 1e-3);
  CHECK(ledoit_wolf_intensity(c, 10) > ledoit_wolf_intensity(c, 1000));

  Matrix rank1(2, 2);
  rank1 << 1, 1, 1, 1;
  CHECK(min_eigenvalue(ledoit_wolf_shrink(rank1, 5)) > 0.0);

  Philox rng(2);
  Matrix obs(20000, 3);
  for (Eigen::Index t = 0; t < obs.rows(); ++t)
    for (Eigen::Index j = 0; j < 3; ++j) obs(t, j) = rng.normal() * (1.0 + j);
  const auto lw = ledoit_wolf(obs);
  CHECK(lw.intensity < 1e-3);
  CHECK((lw.cov - covariance(obs)).norm() < 1e-2);
}

TEST_CASE("rank-condition detector") {
  ModelParams p;
  p.d = 2;
  p.m = 1;
  p.beta = Matrix(2, 1);
  p.beta << 1, 0;
  p.delta = Vector(2);
  p.delta << 1, 2;
  p.sigma1 = Matrix::Identity(2, 2);
  p.sigma3 = Matrix::Identity(2, 2);
  auto rep = validate_stability_preconditions(p);
  CHECK(rep.rank_btb == 1);
  CHECK(rep.rank_projected_delta == 1);
  CHECK(rep.condition_violated);

  p.delta << 2, 2;
  p.beta << 0.6, 0.8;
  rep = validate_stability_preconditions(p);
  CHECK(rep.delta_proportional_identity);
  CHECK(rep.rank_projected_delta == 1);
  CHECK(rep.condition_violated);

  Philox rng(30);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index d = 2 + trial % 9;
    const Eigen::Index m = 1 + trial % std::min<Eigen::Index>(d - 1, 4);
    const auto generic = testing::random_model(rng, d, m, -3.0);
    const auto r = validate_stability_preconditions(generic);
    CHECK(r.rank_btb == m);
    CHECK(r.rank_projected_delta == d - m);
    CHECK_FALSE(r.condition_violated);
  }
}

TEST_CASE("assembled model uses the fitted drift decomposition") {
  const auto p = testing::assembled_model(3, 4, 2, -70.0);
  CHECK(p.d == 4);
  CHECK(p.factor_shrinkage >= 0.0);
  CHECK(p.factor_shrinkage <= 1.0);
  CHECK(min_eigenvalue(p.sigma3) > -1e-10);
  CHECK(p.beta_ols.rows() == 4);
}
