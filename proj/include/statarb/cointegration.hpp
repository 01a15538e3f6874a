#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "statarb/csv.hpp"
#include "statarb/linalg.hpp"

namespace statarb {

struct RegressionFit {
  double alpha = 0.0;     // per year
  Vector beta;            // m loadings
  Vector z_series;        // n + 1 points, z[0] = 0
  Vector residuals;       // n per-period residuals
  double residual_variance = 0.0;
  Vector beta_stderr;
};

/// OLS of per-period stock returns on factor returns with intercept alpha * dt.
RegressionFit fit_factor_regression(const Vector& stock_returns, const Matrix& factor_returns, double dt);

struct AdfResult {
  double stat = 0.0;
  double pvalue = 1.0;
  int lag = 0;
  int max_lag = 0;
  Eigen::Index nobs = 0;
};

/// floor(12 (n/100)^(1/4))
int schwert_max_lag(Eigen::Index n);

/// MacKinnon (1994) approximate p-value, constant-only regression, one series.
double mackinnon_pvalue(double stat);

/// Constant, no trend; lag picked by AIC over 0..max_lag on a common sample, then refit.
AdfResult adf_test(const Vector& z, std::optional<int> max_lag = std::nullopt);

struct OuEstimate {
  double theta = 0.0;
  std::optional<double> delta;  // per year; absent when the lag-1 ratio is not positive
  double autocorr_ratio = 0.0;
  bool tradeable = false;
};

OuEstimate estimate_ou(const Vector& z, double dt);

struct CointegrationFit {
  std::string ticker;
  double alpha = 0.0;
  Vector beta_row;
  Vector z_series;
  double adf_stat = 0.0;
  double adf_pvalue = 1.0;
  int adf_lag = 0;
  double theta_hat = 0.0;
  std::optional<double> delta_hat;
  double residual_variance = 0.0;
  bool tradeable = false;

  /// 252 / delta_hat trading days, when delta_hat is defined.
  std::optional<double> reversion_days() const;
};

struct ScreeningOptions {
  std::optional<int> max_lag;
};

/// Regression, ADF and OU estimate for one ticker.
CointegrationFit fit_ticker(const std::string& ticker, const Vector& stock_returns,
                            const Matrix& factor_returns, double dt, const ScreeningOptions& options = {});

struct UniverseSelection {
  std::vector<std::string> tickers;
  std::vector<CointegrationFit> fits;
  std::optional<Date> window_start;
  std::optional<Date> window_end;

  std::size_t size() const { return tickers.size(); }
};

UniverseSelection select_universe(const std::vector<CointegrationFit>& fits, std::size_t d_max,
                                  double p_threshold);

void write_screening(const std::vector<CointegrationFit>& fits, const UniverseSelection& selection,
                     const std::filesystem::path& path);

}  // namespace statarb
