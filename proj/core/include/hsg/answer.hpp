#pragma once

#include <optional>
#include <string>

#include "hsg/tokenizer.hpp"

namespace hsg {

enum class Role { sneaky, correction, reference };

enum class Verdict { claims_error, claims_correct, unparseable };

const char* to_string(Role role);
const char* to_string(Verdict verdict);
Role role_from_string(const std::string& s);
Verdict verdict_from_string(const std::string& s);

/// A generated or reference solution. `final_value` is present iff the text
/// carries exactly one \boxed{...} marker; `length` is the token count under
/// the run's configured tokenizer.
struct Answer {
  std::string text;
  std::optional<std::string> final_value;
  int length = 0;
  Role role = Role::sneaky;
};

Answer make_answer(std::string text, Role role, const Tokenizer& tokenizer);

/// A diagnosis-role output with its parsed verdict.
struct DiagnosticReport {
  std::string text;
  Verdict verdict = Verdict::unparseable;
  int length = 0;
};

DiagnosticReport make_report(std::string text, const Tokenizer& tokenizer);

// Verdict grammar: the first line starting with "Verdict:" decides; its first
// word is matched case-insensitively against INCORRECT / WRONG / ERROR
// (claims_error) and CORRECT / OK (claims_correct). No such line, or an
// unrecognized word, parses as unparseable.
Verdict parse_verdict(const std::string& text);

}  // namespace hsg
