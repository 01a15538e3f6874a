#include <doctest.h>

#include <cmath>

#include "statarb/cointegration.hpp"
#include "statarb/error.hpp"
#include "statarb/rng.hpp"
#include "support.hpp"

using namespace statarb;
using statarb::testing::weyl;

namespace {

constexpr double kDt = 1.0 / 252.0;

Vector weyl_noise(Eigen::Index n) {
  Vector e(n);
  for (Eigen::Index t = 0; t < n; ++t) e(t) = weyl(t + 1);
  return e;
}

}  // namespace

TEST_CASE("exact linear fits") {
  const Eigen::Index n = 40;
  Matrix f(n, 2);
  for (Eigen::Index t = 0; t < n; ++t) {
    f(t, 0) = 0.01 * weyl(3 * t + 1);
    f(t, 1) = 0.01 * weyl(5 * t + 2);
  }
  SUBCASE("half the first factor") {
    const auto fit = fit_factor_regression(0.5 * f.col(0), f, kDt);
    CHECK(std::abs(fit.alpha) < 1e-12);
    CHECK(fit.beta(0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::abs(fit.beta(1)) < 1e-12);
    CHECK(fit.z_series.cwiseAbs().maxCoeff() < 1e-15);
    CHECK(fit.z_series.size() == n + 1);
  }
  SUBCASE("intercept absorbs c dt") {
    const double c = 0.3;
    const Vector y = f.col(0).array() + c * kDt;
    const auto fit = fit_factor_regression(y, f, kDt);
    CHECK(fit.alpha == doctest::Approx(c).epsilon(1e-10));
    CHECK(fit.beta(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.z_series.cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("collinear factors") {
    Matrix g(n, 2);
    g.col(0) = f.col(0);
    g.col(1) = 2.0 * f.col(0);
    CHECK_THROWS_AS(fit_factor_regression(f.col(1), g, kDt), Error);
  }
}

TEST_CASE("regression matches frozen OLS values") {
  const Eigen::Index n = 100;
  Matrix f(n, 2);
  Vector y(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    f(t, 0) = 0.01 * weyl(5 * t + 1);
    f(t, 1) = 0.02 * weyl(11 * t + 4);
    y(t) = 0.0005 + 1.2 * f(t, 0) - 0.4 * f(t, 1) + 0.003 * weyl(3 * t + 2);
  }
  const auto fit = fit_factor_regression(y, f, kDt);
  CHECK(fit.alpha == doctest::Approx(0.12163498882657105).epsilon(1e-9));
  CHECK(fit.beta(0) == doctest::Approx(1.2041906153701598).epsilon(1e-11));
  CHECK(fit.beta(1) == doctest::Approx(-0.3992132425750198).epsilon(1e-11));
  CHECK(fit.beta_stderr(0) == doctest::Approx(0.030861277293467576).epsilon(1e-9));
  CHECK(fit.beta_stderr(1) == doctest::Approx(0.015388988366261685).epsilon(1e-9));
  CHECK(fit.residual_variance == doctest::Approx(7.900623506281437e-07).epsilon(1e-9));
}

TEST_CASE("simulated loadings recovered within three standard errors") {
  Philox rng(21);
  const Eigen::Index n = 5000;
  Matrix f(n, 2);
  Vector y(n);
  double z = 0.0;
  Vector beta(2);
  beta << 0.9, -0.3;
  const double alpha = 0.05, delta = 20.0;
  for (Eigen::Index t = 0; t < n; ++t) {
    f(t, 0) = 0.01 * rng.normal();
    f(t, 1) = 0.006 * rng.normal();
    const double dz = -delta * z * kDt + 0.015 * rng.normal();
    y(t) = alpha * kDt + beta.dot(f.row(t)) + dz;
    z += dz;
  }
  const auto fit = fit_factor_regression(y, f, kDt);
  for (Eigen::Index j = 0; j < 2; ++j) CHECK(std::abs(fit.beta(j) - beta(j)) < 3.0 * fit.beta_stderr(j));
}

TEST_CASE("mackinnon p-values match the reference implementation") {
  CHECK(mackinnon_pvalue(-3.0) == doctest::Approx(0.034894400275345266).epsilon(1e-12));
  CHECK(mackinnon_pvalue(-4.5) == doctest::Approx(0.0001966399003359905).epsilon(1e-10));
  CHECK(mackinnon_pvalue(-1.0) == doctest::Approx(0.7532643012005655).epsilon(1e-12));
  CHECK(mackinnon_pvalue(-1.61) == doctest::Approx(0.4779756525941893).epsilon(1e-12));
  CHECK(mackinnon_pvalue(-1.7) == doctest::Approx(0.4311124768686236).epsilon(1e-12));
  CHECK(mackinnon_pvalue(2.0) == doctest::Approx(0.9986729511999243).epsilon(1e-12));
  CHECK(mackinnon_pvalue(3.0) == 1.0);
  CHECK(mackinnon_pvalue(-20.0) == 0.0);
}

TEST_CASE("adf statistics match frozen reference values") {
  const Eigen::Index n = 200;
  const Vector e = weyl_noise(n);
  Vector rw(n), ar(n), mix(n);
  double acc = 0.0;
  for (Eigen::Index t = 0; t < n; ++t) {
    acc += e(t);
    rw(t) = acc;
    ar(t) = t == 0 ? 0.0 : 0.5 * ar(t - 1) + e(t);
    mix(t) = 0.01 * static_cast<double>(t) + std::sin(0.3 * static_cast<double>(t)) + e(t);
  }
  struct Case {
    const Vector* z;
    int max_lag;
    double stat;
    double pvalue;
    int lag;
    Eigen::Index nobs;
  };
  const Case cases[] = {
      {&rw, 0, -8.519547518448228, 1.1102233596159088e-13, 0, 199},
      {&rw, 4, -3.191337408659804, 0.0204916115693482, 4, 195},
      {&rw, 8, -3.985893533716823, 0.0014862050390967042, 8, 191},
      {&ar, 0, -15.068097550268126, 8.805434047744565e-28, 0, 199},
      {&ar, 4, -5.83690489260946, 3.8574790029381633e-07, 4, 195},
      {&ar, 8, -6.268244350940241, 4.063844655546289e-08, 8, 191},
      {&mix, 0, -4.033057262341715, 0.001246969887346786, 0, 199},
      {&mix, 4, -5.335021141677783, 4.6314115182158925e-06, 3, 196},
      {&mix, 8, -3.2675176089955933, 0.016394361828008942, 8, 191},
  };
  for (const auto& c : cases) {
    CAPTURE(c.max_lag);
    const auto r = adf_test(*c.z, c.max_lag);
    CHECK(r.stat == doctest::Approx(c.stat).epsilon(1e-9));
    CHECK(r.pvalue == doctest::Approx(c.pvalue).epsilon(1e-7));
    CHECK(r.lag == c.lag);
    CHECK(r.nobs == c.nobs);
  }
}

TEST_CASE("adf degenerate inputs") {
  Vector flat = Vector::Constant(100, 3.0);
  CHECK_THROWS_AS(adf_test(flat), Error);
  Vector line(100);
  for (Eigen::Index t = 0; t < 100; ++t) line(t) = static_cast<double>(t);
  CHECK_THROWS_AS(adf_test(line), Error);
  CHECK_THROWS_AS(adf_test(Vector::Ones(5)), Error);
}

TEST_CASE("trend plus noise is not rejected with a constant-only regression") {
  Philox rng(4);
  int rejected = 0;
  for (int trial = 0; trial < 50; ++trial) {
    Vector z(500);
    for (Eigen::Index t = 0; t < 500; ++t) z(t) = static_cast<double>(t) + 0.5 * rng.normal();
    if (adf_test(z).pvalue <= 0.01) ++rejected;
  }
  CHECK(rejected == 0);
}

TEST_CASE("schwert rule") {
  CHECK(schwert_max_lag(100) == 12);
  CHECK(schwert_max_lag(220) == 14);
  CHECK(schwert_max_lag(2000) == 25);
}

TEST_CASE("ou estimates") {
  Vector z(3);
  z << 1, 2, 3;
  CHECK(estimate_ou(z, kDt).theta == 2.0);

  Vector alt(10);
  for (Eigen::Index t = 0; t < 10; ++t) alt(t) = t % 2 == 0 ? 1.0 : -1.0;
  const auto o = estimate_ou(alt, kDt);
  CHECK(o.autocorr_ratio < 0.0);
  CHECK_FALSE(o.tradeable);
  CHECK_FALSE(o.delta.has_value());

  Philox rng(8);
  const double delta = 10.0, sd = 0.2;
  Vector ou(100000);
  ou(0) = 0.0;
  for (Eigen::Index t = 1; t < ou.size(); ++t) {
    ou(t) = ou(t - 1) - delta * ou(t - 1) * kDt + sd * std::sqrt(kDt) * rng.normal();
  }
  const auto est = estimate_ou(ou, kDt);
  REQUIRE(est.delta);
  CHECK(std::abs(*est.delta - delta) / delta < 0.10);
}

TEST_CASE("universe selection") {
  auto make = [](const std::string& name, double p, double delta) {
    CointegrationFit f;
    f.ticker = name;
    f.adf_pvalue = p;
    f.delta_hat = delta;
    f.tradeable = true;
    return f;
  };
  std::vector<CointegrationFit> fits;
  for (int i = 0; i < 20; ++i) fits.push_back(make("T" + std::to_string(i), 0.001, 1.0 + i));
  const auto top = select_universe(fits, 15, 0.01);
  REQUIRE(top.size() == 15);
  CHECK(top.tickers.front() == "T19");
  CHECK(top.tickers.back() == "T5");

  fits.resize(4);
  CHECK(select_universe(fits, 15, 0.01).size() == 4);

  for (auto& f : fits) f.adf_pvalue = 0.5;
  CHECK(select_universe(fits, 15, 0.01).size() == 0);
}
