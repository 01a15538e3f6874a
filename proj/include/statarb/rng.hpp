#pragma once

#include <array>
#include <cstdint>

namespace statarb {

/// Philox4x32-10 counter-based generator. A (seed, stream) pair fixes the key and
/// the upper counter words, so independent streams never overlap.
class Philox {
 public:
  explicit Philox(std::uint64_t seed, std::uint64_t stream = 0);

  std::array<std::uint32_t, 4> next_block();

  /// Uniform in the open interval (0, 1).
  double uniform();

  /// Standard normal via Box-Muller; caches the second variate.
  double normal();

 private:
  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> counter_;
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace statarb
