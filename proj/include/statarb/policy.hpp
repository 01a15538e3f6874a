#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "statarb/csv.hpp"
#include "statarb/hjb.hpp"
#include "statarb/model.hpp"

namespace statarb {

enum class PolicyKind { OptimalUnconstrained, MyopicUnconstrained, OptimalNeutral, MyopicNeutral };

inline constexpr PolicyKind kAllPolicies[] = {PolicyKind::OptimalUnconstrained, PolicyKind::MyopicUnconstrained,
                                              PolicyKind::OptimalNeutral, PolicyKind::MyopicNeutral};

const char* to_string(PolicyKind kind);
bool is_optimal(PolicyKind kind);
bool is_neutral(PolicyKind kind);
Variant variant_of(PolicyKind kind);

/// Affine steady-state feedback pi(z) = M (offset + slope z) / (1 - gamma).
class ControlPolicy {
 public:
  /// Optimal kinds require the matching HJB solution; myopic kinds ignore it.
  ControlPolicy(PolicyKind kind, ModelParams params, std::optional<HJBSolution> solution = std::nullopt);

  PolicyKind kind() const { return kind_; }
  const ModelParams& params() const { return *params_; }
  const std::optional<HJBSolution>& solution() const { return solution_; }

  Vector control(const Vector& z) const;

  /// Linear part d pi / d z.
  Matrix slope() const;

 private:
  PolicyKind kind_;
  std::shared_ptr<const ModelParams> params_;
  std::optional<HJBSolution> solution_;
  Matrix precision_;
  Vector offset_;
  Matrix slope_;
  double scale_ = 1.0;
  Matrix neutral_basis_;  // sigma1^-1 beta, neutral kinds only
  Matrix neutral_gram_pinv_;
};

struct WealthPath {
  std::vector<Date> dates;
  Vector wealth;           // n + 1 points
  Matrix weights_history;  // n x d, weights held over each period
  Vector cash_weight_history;
  std::vector<std::string> tickers;
};

struct WealthOptions {
  double w0 = 1.0;
  std::vector<Date> dates;  // n + 1 entries when given
  std::vector<std::string> tickers;
};

/// W_{t+1} = W_t (1 + pi_t . ret_t + r (1 - sum pi_t) dt), pi_t from z_path row t.
WealthPath simulate_wealth(const ControlPolicy& policy, const Matrix& z_path, const Matrix& stock_returns,
                           double r, double dt, const WealthOptions& options = {});

/// Same recursion with caller-supplied weights per period.
WealthPath wealth_from_weights(const Matrix& weights, const Matrix& stock_returns, double r, double dt,
                               const WealthOptions& options = {});

void write_wealth(const WealthPath& path, const std::filesystem::path& file);
WealthPath load_wealth(const std::filesystem::path& file);

}  // namespace statarb
