#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "statarb/error.hpp"
#include "statarb/policy.hpp"
#include "statarb/rng.hpp"
#include "support.hpp"

using namespace statarb;

TEST_CASE("myopic unconstrained scalar position") {
  ModelInputs in;
  in.mu = Vector::Constant(1, 0.1);
  in.theta = Vector::Zero(1);
  in.delta = Vector::Constant(1, 3.0);
  in.eta = Vector::Constant(1, 0.05);
  in.sigma0 = Matrix::Constant(1, 1, 0.04);
  in.cross = Matrix::Zero(1, 1);
  in.sigma1 = Matrix::Identity(1, 1);
  in.gamma = -1.0;
  const ControlPolicy pol(PolicyKind::MyopicUnconstrained, make_model(in));
  CHECK(pol.control(Vector::Zero(1))(0) == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(pol.control(Vector::Constant(1, 0.01))(0) == doctest::Approx(0.5 * (0.1 - 0.03)).epsilon(1e-14));
}

TEST_CASE("neutral policies hold no factor exposure") {
  Philox rng(40);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index d = 2 + trial % 8;
    const Eigen::Index m = 1 + trial % std::min<Eigen::Index>(d, 3);
    const auto p = testing::random_model(rng, d, m, -(1.0 + trial));
    const ControlPolicy myopic(PolicyKind::MyopicNeutral, p);
    const ControlPolicy optimal(PolicyKind::OptimalNeutral, p, solve_hjb(p, Variant::Constrained));
    const Vector z = testing::uniform_vector(rng, d, -0.05, 0.05);
    CHECK((p.beta.transpose() * myopic.control(z)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((p.beta.transpose() * optimal.control(z)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("no position at the no-signal point") {
  Philox rng(41);
  const auto p = testing::random_model(rng, 4, 2, -3.0);
  const Vector z0 = p.delta.cwiseInverse().cwiseProduct(p.mu);
  const ControlPolicy myopic(PolicyKind::MyopicUnconstrained, p);
  CHECK(myopic.control(z0).norm() < 1e-12);
}

TEST_CASE("optimal policy requires a matching solution") {
  Philox rng(42);
  const auto p = testing::random_model(rng, 3, 1, -3.0);
  CHECK_THROWS_AS(ControlPolicy(PolicyKind::OptimalUnconstrained, p), Error);
  CHECK_THROWS_AS(ControlPolicy(PolicyKind::OptimalUnconstrained, p, solve_hjb(p, Variant::Constrained)), Error);
}

TEST_CASE("risk-free compounding and flat stock") {
  const Matrix ret = Matrix::Zero(252, 1);
  const auto w = wealth_from_weights(Matrix::Zero(252, 1), ret, 0.01, 1.0 / 252.0);
  CHECK(std::abs(w.wealth(252) - std::pow(1.0 + 0.01 / 252.0, 252)) < 1e-12);
  const auto full = wealth_from_weights(Matrix::Ones(252, 1), ret, 0.01, 1.0 / 252.0);
  CHECK(full.wealth(252) == 1.0);
  CHECK(full.cash_weight_history.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("bankruptcy names the period") {
  Matrix ret(2, 1);
  ret << 0.01, -0.6;
  try {
    wealth_from_weights(Matrix::Constant(2, 1, 2.0), ret, 0.0, 1.0 / 252.0);
    FAIL("expected bankruptcy");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Bankruptcy);
    CHECK(std::string(e.what()).find("period 2") != std::string::npos);
  }
}

TEST_CASE("wealth csv round trip") {
  testing::TempDir dir("policy");
  Matrix ret(3, 2);
  ret << 0.01, -0.02, 0.003, 0.001, -0.004, 0.02;
  Matrix w(3, 2);
  w << 0.3, -0.1, 0.25, 0.05, 0.1, 0.2;
  WealthOptions opts;
  opts.tickers = {"AAA", "BBB"};
  opts.dates = testing::business_days_for_test(4);
  const auto path = wealth_from_weights(w, ret, 0.02, 1.0 / 252.0, opts);
  write_wealth(path, dir / "w.csv");
  const auto back = load_wealth(dir / "w.csv");
  CHECK(back.wealth == path.wealth);
  CHECK(back.weights_history == path.weights_history);
  CHECK(back.cash_weight_history == path.cash_weight_history);
  CHECK(back.tickers == path.tickers);
  CHECK(back.dates == path.dates);
}

TEST_CASE("optimal policy beats cash on its own market") {
  MarketShape shape;
  shape.d = 4;
  shape.m = 2;
  shape.delta_lo = 5.0;
  shape.delta_hi = 15.0;
  const double r = 0.02, gamma = -5.0;
  const SynthConfig base = random_market(shape, 252 * 20, 1);
  const auto params = model_from_config(base, r, gamma);
  const ControlPolicy pol(PolicyKind::OptimalUnconstrained, params, solve_hjb(params, Variant::Unconstrained));
  int wins = 0;
  for (int seed = 0; seed < 50; ++seed) {
    SynthConfig c = base;
    c.seed = 100 + seed;
    const auto path = simulate(c);
    const auto w = simulate_wealth(pol, path.spreads, path.stock_returns(), r, c.dt);
    if (std::log(w.wealth(w.wealth.size() - 1)) > static_cast<double>(c.n_steps) * std::log1p(r * c.dt)) ++wins;
  }
  CHECK(wins >= 40);
}
