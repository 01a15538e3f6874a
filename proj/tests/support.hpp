#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "statarb/model.hpp"
#include "statarb/rng.hpp"
#include "statarb/synth.hpp"

namespace statarb::testing {

/// Centered Weyl sequence frac(t * golden) - 1/2; the same values are easy to
/// reproduce in any language, which is how the frozen oracle numbers were made.
double weyl(long long t);

double uniform(Philox& rng, double lo, double hi);
Vector uniform_vector(Philox& rng, Eigen::Index n, double lo, double hi);

/// Primitive-parameter model: joint covariance G = L L' rescaled to equity-like
/// vols, reversion speeds in [2, 40] per year.
ModelParams random_model(Philox& rng, Eigen::Index d, Eigen::Index m, double gamma, double r = 0.01);

/// Model assembled from a simulated 250-step training window, the way a backtest builds it.
ModelParams assembled_model(std::uint64_t seed, Eigen::Index d, Eigen::Index m, double gamma, double r = 0.01);

/// Model whose reversion matrix is a multiple of the identity.
ModelParams scalar_delta_model(Philox& rng, Eigen::Index d, Eigen::Index m, double gamma);

class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& path);

/// Weekdays from 2020-01-02.
std::vector<Date> business_days_for_test(std::size_t count);

}  // namespace statarb::testing
