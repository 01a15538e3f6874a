#pragma once

#include <stdexcept>
#include <string>

namespace statarb {

enum class ErrorKind {
  Parse,
  Data,
  EmptyPanel,
  InsufficientData,
  RegressionDegenerate,
  DegenerateColumn,
  Normalization,
  Dimension,
  Collinearity,
  DegenerateSeries,
  UnsupportedRegime,
  Conditioning,
  Shape,
  Numeric,
  Divergence,
  Convergence,
  DegenerateSteadyState,
  Bankruptcy,
  Config,
  Io,
};

const char* to_string(ErrorKind kind);

/// True for kinds that come from numerical failure rather than bad input.
bool is_numerical(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace statarb
