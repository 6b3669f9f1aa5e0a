#include "hsg/corrector.hpp"

#include <limits>
#include <regex>

#include "hsg/errors.hpp"
#include "hsg/format_spec.hpp"
#include "hsg/toy_domain.hpp"

namespace hsg {

std::optional<std::string> replace_boxed(const std::string& text, const std::string& value) {
  if (count_boxed_markers(text) != 1) return std::nullopt;
  constexpr std::string_view marker = "\\boxed{";
  const std::size_t begin = text.find(marker);
  std::size_t i = begin + marker.size();
  int depth = 1;
  for (; i < text.size(); ++i) {
    if (text[i] == '{') ++depth;
    if (text[i] == '}' && --depth == 0) break;
  }
  if (i >= text.size()) return std::nullopt;
  return text.substr(0, begin + marker.size()) + value + text.substr(i);
}

std::optional<long> extract_correction_value(const std::string& report_text) {
  static const std::regex value_re(
      R"((?:correct value(?: is)?|should be)\s*(-?\d+))", std::regex::icase);
  std::smatch m;
  if (std::regex_search(report_text, m, value_re)) {
    return std::stol(m[1].str());
  }
  return std::nullopt;
}

std::string RuleBasedCorrector::correct_text(const std::string& a_s_text,
                                             const std::string& a_d_text) {
  if (parse_verdict(a_d_text) != Verdict::claims_error) return a_s_text;

  std::optional<long> value = extract_correction_value(a_d_text);
  if (!value) value = derive_from_steps(a_s_text);
  if (!value) return a_s_text;  // nothing actionable in the diagnosis

  auto fixed = replace_boxed(a_s_text, std::to_string(*value));
  return fixed ? *fixed : a_s_text;
}

std::vector<Generation> RuleBasedCorrector::sample(const RoleContext& ctx, int n,
                                                   std::uint64_t seed) {
  (void)seed;
  ctx.validate();
  if (ctx.role != Actor::correction) {
    throw backend_error("unsupported_role", "rule corrector only serves the correction actor");
  }
  Generation g;
  g.text = correct_text(ctx.input("a_s"), ctx.input("a_d"));
  g.logprob = 0.0;  // deterministic
  return std::vector<Generation>(static_cast<std::size_t>(n), g);
}

double RuleBasedCorrector::logprob(const RoleContext& ctx, const std::string& text) {
  return text == correct_text(ctx.input("a_s"), ctx.input("a_d"))
             ? 0.0
             : -std::numeric_limits<double>::infinity();
}

}  // namespace hsg
