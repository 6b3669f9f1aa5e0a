#pragma once

#include <optional>
#include <string>

#include "hsg/policy.hpp"

namespace hsg {

/// Replaces the content of the unique \boxed{...} marker. Returns nullopt when
/// the marker count differs from one.
std::optional<std::string> replace_boxed(const std::string& text, const std::string& value);

/// First correction value named by a report ("the correct value is 42",
/// "correct value 42", "should be 42").
std::optional<long> extract_correction_value(const std::string& report_text);

/// The fixed, untrained corrector. It sees only (a_S, a_D) — never the
/// question — and trusts the diagnosis:
///   - verdict CORRECT (or unparseable): a_S returned unchanged;
///   - verdict INCORRECT with a named value: boxed value replaced by it;
///   - verdict INCORRECT without one: the chain is recomputed from the
///     answer's own steps and the boxed value replaced by the result.
class RuleBasedCorrector : public Policy {
 public:
  std::vector<Generation> sample(const RoleContext& ctx, int n, std::uint64_t seed) override;
  double logprob(const RoleContext& ctx, const std::string& text) override;
  std::string backend_id() const override { return "rule-corrector"; }

  static std::string correct_text(const std::string& a_s_text, const std::string& a_d_text);
};

}  // namespace hsg
