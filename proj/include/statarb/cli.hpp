#pragma once

#include <string>
#include <vector>

#include "statarb/backtest.hpp"
#include "statarb/serialize.hpp"

namespace statarb {

/// Backtest/screen/solve parameters read from a JSON config. Keys absent
/// from the file keep the WindowSpec defaults.
struct RunConfig {
  WindowSpec window;
  std::uint64_t seed = 0;
  std::optional<std::string> benchmark;
  std::vector<int> sweep_train{190, 200, 210, 220, 230, 240, 250};
  std::vector<int> sweep_test{10, 11, 12, 13, 14, 15, 16};
};

/// Collects every invalid or unknown key before throwing one Config error.
RunConfig parse_run_config(const Json& j);

struct SimulateConfig {
  MarketShape shape;
  Eigen::Index n_steps = 2520;
  std::uint64_t seed = 0;
  double dt = kDefaultDt;
  std::optional<SynthConfig> market;  // explicit market overrides the random shape
  bool benchmark = true;
  std::string start_date = "2000-01-03";
};

SimulateConfig parse_simulate_config(const Json& j);

/// Exit code: 0 success, 1 validation or IO, 2 numerical failure.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);

}  // namespace statarb
