#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "statarb/csv.hpp"
#include "statarb/linalg.hpp"
#include "statarb/marketdata.hpp"
#include "statarb/model.hpp"

namespace statarb {

/// Factor/stock/spread market with known parameters. mu is the total stock
/// drift (not in excess of r); all rates per year.
struct SynthConfig {
  Eigen::Index d = 0;
  Eigen::Index m = 0;
  Vector eta;
  Vector mu;
  Vector delta;
  Vector theta;
  Matrix sigma0;
  Matrix sigma1;
  Matrix cross;
  double dt = kDefaultDt;
  Eigen::Index n_steps = 0;
  std::uint64_t seed = 0;
  std::optional<Vector> z0;  // defaults to theta
  double s0 = 100.0;
  double f0 = 100.0;
};

struct SynthPath {
  Matrix factor_levels;  // (n+1) x m
  Matrix stock_levels;   // (n+1) x d
  Matrix spreads;        // (n+1) x d
  Matrix shocks;         // n x (m+d) Brownian increments
  Matrix beta;           // implied cross * sigma0^-1
  Vector alpha;          // implied mu - beta eta - delta theta
  double dt = kDefaultDt;

  Matrix stock_returns() const;
  Matrix factor_returns() const;
};

/// Joint diffusion [[sigma0, cross'], [cross, sigma1]].
Matrix joint_diffusion(const SynthConfig& config);

/// Throws Config with a matrix diagnostic when the config is inconsistent.
void validate(const SynthConfig& config);

SynthPath simulate(const SynthConfig& config);

/// Weekday calendar starting at start.
std::vector<Date> business_days(Date start, std::size_t count);

PricePanel to_panel(const SynthPath& path, const std::vector<std::string>& tickers,
                    const std::optional<std::string>& benchmark = std::nullopt,
                    Date start = Date{std::chrono::year{2000} / 1 / 3});

struct MarketShape {
  Eigen::Index d = 5;
  Eigen::Index m = 2;
  Eigen::Index cointegrated = -1;  // number of fast-reverting stocks, -1 for all
  double delta_lo = 25.0;
  double delta_hi = 80.0;
  double slow_delta = 0.05;
  double r = 0.02;
};

/// Plausible equity-like parameters drawn from seed: market factor plus minor
/// factors, loadings near one on the market, idiosyncratic spreads.
SynthConfig random_market(const MarketShape& shape, Eigen::Index n_steps, std::uint64_t seed);

/// ModelParams view of a config (mu in excess of r).
ModelParams model_from_config(const SynthConfig& config, double r, double gamma);

/// Config reproducing a ModelParams market.
SynthConfig config_from_model(const ModelParams& params, Eigen::Index n_steps, std::uint64_t seed,
                              double dt = kDefaultDt);

}  // namespace statarb
