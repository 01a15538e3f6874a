#include "statarb/cointegration.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include "statarb/error.hpp"
#include "statarb/marketdata.hpp"

namespace statarb {

RegressionFit fit_factor_regression(const Vector& stock_returns, const Matrix& factor_returns, double dt) {
  const Eigen::Index n = stock_returns.size();
  const Eigen::Index m = factor_returns.cols();
  if (factor_returns.rows() != n) fail(ErrorKind::Dimension, "regression: factor rows differ from stock rows");
  if (n < m + 2) {
    fail(ErrorKind::InsufficientData, "regression: need at least m + 2 = " + std::to_string(m + 2) +
                                          " observations, got " + std::to_string(n));
  }
  Matrix x(n, m + 1);
  x.col(0).setOnes();
  x.rightCols(m) = factor_returns;
  Eigen::ColPivHouseholderQR<Matrix> qr(x);
  qr.setThreshold(1e-10);
  if (qr.rank() < m + 1) fail(ErrorKind::Collinearity, "regression: factor matrix is rank deficient");
  const Vector coef = qr.solve(stock_returns);

  RegressionFit fit;
  fit.alpha = coef(0) / dt;
  fit.beta = coef.tail(m);
  fit.residuals = stock_returns - x * coef;
  fit.z_series.resize(n + 1);
  fit.z_series(0) = 0.0;
  for (Eigen::Index t = 0; t < n; ++t) fit.z_series(t + 1) = fit.z_series(t) + fit.residuals(t);
  const double dof = static_cast<double>(n - m - 1);
  fit.residual_variance = dof > 0 ? fit.residuals.squaredNorm() / dof : 0.0;

  // (X'X)^-1 = P R^-1 R^-T P'
  const Eigen::Index k = m + 1;
  Matrix r = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  Matrix rinv = r.triangularView<Eigen::Upper>().solve(Matrix::Identity(k, k));
  Matrix xtx_inv_perm = rinv * rinv.transpose();
  Matrix xtx_inv = qr.colsPermutation() * xtx_inv_perm * qr.colsPermutation().transpose();
  fit.beta_stderr = (fit.residual_variance * xtx_inv.diagonal().tail(m)).cwiseSqrt();
  return fit;
}

int schwert_max_lag(Eigen::Index n) {
  return static_cast<int>(std::floor(12.0 * std::pow(static_cast<double>(n) / 100.0, 0.25)));
}

double mackinnon_pvalue(double stat) {
  constexpr double tau_max = 2.74;
  constexpr double tau_min = -18.83;
  constexpr double tau_star = -1.61;
  constexpr double small_p[] = {2.1659, 1.4412, 0.038269};
  constexpr double large_p[] = {1.7339, 0.93202, -0.12745, -0.010368};
  if (stat > tau_max) return 1.0;
  if (stat < tau_min) return 0.0;
  double poly = 0.0;
  if (stat <= tau_star) {
    for (int i = 2; i >= 0; --i) poly = poly * stat + small_p[i];
  } else {
    for (int i = 3; i >= 0; --i) poly = poly * stat + large_p[i];
  }
  return 0.5 * std::erfc(-poly / std::numbers::sqrt2);
}

namespace {

// Design for the ADF regression on the sample that drops the first `lags` differences:
// columns [1, z_{t}, dz_{t-1}, ..., dz_{t-lags}], response dz_t.
void adf_design(const Vector& z, int lags, Matrix& x, Vector& y) {
  const Eigen::Index nd = z.size() - 1;
  const Eigen::Index nobs = nd - lags;
  x.resize(nobs, 2 + lags);
  y.resize(nobs);
  for (Eigen::Index i = 0; i < nobs; ++i) {
    const Eigen::Index t = i + lags;
    y(i) = z(t + 1) - z(t);
    x(i, 0) = 1.0;
    x(i, 1) = z(t);
    for (int k = 1; k <= lags; ++k) x(i, 1 + k) = z(t + 1 - k) - z(t - k);
  }
}

struct Ols {
  bool ok = false;
  Vector coef;
  double ssr = 0.0;
  Matrix xtx_inv;
};

Ols ols_leading(const Matrix& gram, const Vector& xty, const Matrix& x, const Vector& y, Eigen::Index k) {
  Ols out;
  Eigen::LLT<Matrix> llt(gram.topLeftCorner(k, k));
  if (llt.info() != Eigen::Success) return out;
  out.coef = llt.solve(xty.head(k));
  out.ssr = (y - x.leftCols(k) * out.coef).squaredNorm();
  out.ok = std::isfinite(out.ssr);
  if (out.ok) out.xtx_inv = llt.solve(Matrix::Identity(k, k));
  return out;
}

double aic(double ssr, Eigen::Index nobs, Eigen::Index k) {
  const double n = static_cast<double>(nobs);
  const double llf = -0.5 * n * (std::log(2.0 * std::numbers::pi) + std::log(ssr / n) + 1.0);
  return -2.0 * llf + 2.0 * static_cast<double>(k);
}

}  // namespace

AdfResult adf_test(const Vector& z, std::optional<int> max_lag) {
  const Eigen::Index n = z.size();
  if (n < 2 || z.maxCoeff() == z.minCoeff()) fail(ErrorKind::DegenerateSeries, "adf: constant series");
  int maxlag = 0;
  if (max_lag) {
    if (*max_lag < 0) fail(ErrorKind::Config, "adf: max_lag must be non-negative");
    maxlag = *max_lag;
  } else {
    maxlag = std::min<int>(schwert_max_lag(n), static_cast<int>(n / 2) - 2);
    maxlag = std::max(maxlag, 0);
  }
  if (n < maxlag + 10) {
    fail(ErrorKind::InsufficientData, "adf: series of length " + std::to_string(n) +
                                          " too short for max lag " + std::to_string(maxlag));
  }
  {
    Vector dz = z.tail(n - 1) - z.head(n - 1);
    const double spread = dz.maxCoeff() - dz.minCoeff();
    if (spread <= 1e-14 * std::max(1.0, dz.cwiseAbs().maxCoeff())) {
      fail(ErrorKind::DegenerateSeries, "adf: differences are constant");
    }
  }

  Matrix x;
  Vector y;
  int best = 0;
  if (maxlag > 0) {
    adf_design(z, maxlag, x, y);
    const Matrix gram = x.transpose() * x;
    const Vector xty = x.transpose() * y;
    double best_ic = std::numeric_limits<double>::infinity();
    for (int lag = 0; lag <= maxlag; ++lag) {
      const Eigen::Index k = 2 + lag;
      Ols fit = ols_leading(gram, xty, x, y, k);
      if (!fit.ok || !(fit.ssr > 0.0)) continue;
      const double ic = aic(fit.ssr, x.rows(), k);
      if (ic < best_ic) {
        best_ic = ic;
        best = lag;
      }
    }
  }

  adf_design(z, best, x, y);
  const Eigen::Index k = 2 + best;
  Ols fit = ols_leading(x.transpose() * x, x.transpose() * y, x, y, k);
  const Eigen::Index nobs = x.rows();
  if (!fit.ok || !(fit.ssr > 0.0) || nobs <= k) {
    fail(ErrorKind::DegenerateSeries, "adf: regression is degenerate");
  }
  const double s2 = fit.ssr / static_cast<double>(nobs - k);
  const double se = std::sqrt(s2 * fit.xtx_inv(1, 1));
  AdfResult out;
  out.stat = fit.coef(1) / se;
  out.pvalue = mackinnon_pvalue(out.stat);
  out.lag = best;
  out.max_lag = maxlag;
  out.nobs = nobs;
  return out;
}

OuEstimate estimate_ou(const Vector& z, double dt) {
  const Eigen::Index n = z.size();
  if (n < 3) fail(ErrorKind::InsufficientData, "estimate_ou: need at least 3 points");
  OuEstimate out;
  out.theta = z.mean();
  const Vector c = z.array() - out.theta;
  const double den = c.squaredNorm();
  if (!(den > 0.0)) fail(ErrorKind::DegenerateSeries, "estimate_ou: constant series");
  const double num = c.tail(n - 1).dot(c.head(n - 1));
  out.autocorr_ratio = num / den;
  if (out.autocorr_ratio > 0.0) {
    out.delta = -std::log(out.autocorr_ratio) / dt;
    out.tradeable = *out.delta > 0.0;
  }
  return out;
}

std::optional<double> CointegrationFit::reversion_days() const {
  if (!delta_hat || !(*delta_hat > 0.0)) return std::nullopt;
  return kTradingDaysPerYear / *delta_hat;
}

CointegrationFit fit_ticker(const std::string& ticker, const Vector& stock_returns,
                            const Matrix& factor_returns, double dt, const ScreeningOptions& options) {
  RegressionFit reg = fit_factor_regression(stock_returns, factor_returns, dt);
  CointegrationFit fit;
  fit.ticker = ticker;
  fit.alpha = reg.alpha;
  fit.beta_row = reg.beta;
  fit.z_series = reg.z_series;
  fit.residual_variance = reg.residual_variance;
  try {
    AdfResult adf = adf_test(reg.z_series, options.max_lag);
    fit.adf_stat = adf.stat;
    fit.adf_pvalue = adf.pvalue;
    fit.adf_lag = adf.lag;
    OuEstimate ou = estimate_ou(reg.z_series, dt);
    fit.theta_hat = ou.theta;
    fit.delta_hat = ou.delta;
    fit.tradeable = ou.tradeable;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::DegenerateSeries && e.kind() != ErrorKind::InsufficientData) throw;
    fit.adf_stat = std::numeric_limits<double>::quiet_NaN();
    fit.adf_pvalue = 1.0;
    fit.tradeable = false;
  }
  return fit;
}

UniverseSelection select_universe(const std::vector<CointegrationFit>& fits, std::size_t d_max,
                                  double p_threshold) {
  std::vector<const CointegrationFit*> pass;
  for (const auto& f : fits) {
    if (f.adf_pvalue <= p_threshold && f.delta_hat && *f.delta_hat > 0.0) pass.push_back(&f);
  }
  std::stable_sort(pass.begin(), pass.end(), [](const CointegrationFit* a, const CointegrationFit* b) {
    if (*a->delta_hat != *b->delta_hat) return *a->delta_hat > *b->delta_hat;
    return a->ticker < b->ticker;
  });
  if (pass.size() > d_max) pass.resize(d_max);
  UniverseSelection out;
  for (const auto* f : pass) {
    out.tickers.push_back(f->ticker);
    out.fits.push_back(*f);
  }
  return out;
}

void write_screening(const std::vector<CointegrationFit>& fits, const UniverseSelection& selection,
                     const std::filesystem::path& path) {
  Eigen::Index m = 0;
  for (const auto& f : fits) m = std::max(m, f.beta_row.size());
  std::set<std::string> chosen(selection.tickers.begin(), selection.tickers.end());
  std::ostringstream out;
  out << "ticker,alpha";
  for (Eigen::Index j = 0; j < m; ++j) out << ",beta_" << (j + 1);
  out << ",adf_stat,adf_pvalue,theta_hat,delta_hat,reversion_days,selected\n";
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  for (const auto& f : fits) {
    out << f.ticker << ',' << format_double(f.alpha);
    for (Eigen::Index j = 0; j < m; ++j) {
      out << ',' << (j < f.beta_row.size() ? format_double(f.beta_row(j)) : std::string());
    }
    out << ',' << format_double(f.adf_stat) << ',' << format_double(f.adf_pvalue) << ','
        << format_double(f.theta_hat) << ',' << opt(f.delta_hat) << ',' << opt(f.reversion_days()) << ','
        << (chosen.count(f.ticker) ? "true" : "false") << '\n';
  }
  write_text(path, out.str());
}

}  // namespace statarb
