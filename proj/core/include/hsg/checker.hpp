#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "hsg/answer.hpp"

namespace hsg {

/// Exact rational used by the canonical answer checker.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;
  bool operator==(const Rational&) const = default;
};

/// Equivalence oracle for final answers. Pluggable: the default is canonical
/// string/rational normalization below; a judge-model checker can slot in
/// behind the same interface.
class AnswerChecker {
 public:
  virtual ~AnswerChecker() = default;
  virtual bool equivalent(const std::string& candidate, const std::string& reference) const = 0;
  virtual std::string id() const = 0;
};

/// Canonical-form equivalence: trims decoration, normalizes rationals and
/// decimals ("084/2" == "42" == "42.0"), falls back to case-folded,
/// whitespace-collapsed symbolic comparison when numeric parsing fails.
class CanonicalChecker : public AnswerChecker {
 public:
  bool equivalent(const std::string& candidate, const std::string& reference) const override;
  std::string id() const override { return "canonical-v1"; }

  static std::optional<Rational> parse_rational(const std::string& raw);
  static std::string canonical_symbol(const std::string& raw);
};

}  // namespace hsg
