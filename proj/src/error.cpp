#include "statarb/error.hpp"

namespace statarb {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::Data: return "data error";
    case ErrorKind::EmptyPanel: return "empty-panel error";
    case ErrorKind::InsufficientData: return "insufficient-data error";
    case ErrorKind::RegressionDegenerate: return "regression-degenerate error";
    case ErrorKind::DegenerateColumn: return "degenerate-column error";
    case ErrorKind::Normalization: return "normalization error";
    case ErrorKind::Dimension: return "dimension error";
    case ErrorKind::Collinearity: return "collinearity error";
    case ErrorKind::DegenerateSeries: return "degenerate-series error";
    case ErrorKind::UnsupportedRegime: return "unsupported-regime error";
    case ErrorKind::Conditioning: return "conditioning error";
    case ErrorKind::Shape: return "shape error";
    case ErrorKind::Numeric: return "numeric error";
    case ErrorKind::Divergence: return "divergence error";
    case ErrorKind::Convergence: return "convergence error";
    case ErrorKind::DegenerateSteadyState: return "degenerate-steady-state error";
    case ErrorKind::Bankruptcy: return "bankruptcy error";
    case ErrorKind::Config: return "config error";
    case ErrorKind::Io: return "io error";
  }
  return "error";
}

bool is_numerical(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::RegressionDegenerate:
    case ErrorKind::Normalization:
    case ErrorKind::Collinearity:
    case ErrorKind::DegenerateSeries:
    case ErrorKind::Conditioning:
    case ErrorKind::Numeric:
    case ErrorKind::Divergence:
    case ErrorKind::Convergence:
    case ErrorKind::DegenerateSteadyState:
    case ErrorKind::Bankruptcy:
      return true;
    default:
      return false;
  }
}

}  // namespace statarb
