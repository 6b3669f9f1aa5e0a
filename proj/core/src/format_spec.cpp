#include "hsg/format_spec.hpp"

#include <optional>

#include "hsg/errors.hpp"

namespace hsg {

namespace {

constexpr std::string_view kBoxed = "\\boxed{";

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

std::string_view ltrim(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
  return s.substr(i);
}

bool is_blank(std::string_view s) { return ltrim(s).empty(); }

}  // namespace

int count_boxed_markers(std::string_view text) {
  int n = 0;
  std::size_t pos = 0;
  while ((pos = text.find(kBoxed, pos)) != std::string_view::npos) {
    ++n;
    pos += kBoxed.size();
  }
  return n;
}

std::optional<std::string> extract_boxed(std::string_view text) {
  if (count_boxed_markers(text) != 1) return std::nullopt;
  std::size_t pos = text.find(kBoxed);
  std::size_t i = pos + kBoxed.size();
  int depth = 1;
  std::string content;
  for (; i < text.size(); ++i) {
    char c = text[i];
    if (c == '{') {
      ++depth;
    } else if (c == '}') {
      --depth;
      if (depth == 0) return content;
    }
    content.push_back(c);
  }
  return std::nullopt;  // unbalanced marker
}

bool FormatRule::passes(std::string_view candidate) const {
  switch (kind) {
    case Kind::boxed_count:
      return count_boxed_markers(candidate) == count;
    case Kind::line_prefix: {
      for (auto line : split_lines(candidate)) {
        if (ltrim(line).starts_with(text)) return true;
      }
      return false;
    }
    case Kind::other_nonblank_line: {
      for (auto line : split_lines(candidate)) {
        if (!is_blank(line) && !ltrim(line).starts_with(text)) return true;
      }
      return false;
    }
    case Kind::forbidden_substring:
      return candidate.find(text) == std::string_view::npos;
  }
  return false;
}

bool FormatSpec::passes(std::string_view text) const {
  for (const auto& rule : rules_) {
    if (!rule.passes(text)) return false;
  }
  return true;
}

FormatSpec FormatSpec::sneaky_default() {
  FormatRule boxed;
  boxed.kind = FormatRule::Kind::boxed_count;
  boxed.count = 1;
  return FormatSpec({boxed});
}

FormatSpec FormatSpec::diagnosis_default() {
  FormatRule verdict;
  verdict.kind = FormatRule::Kind::line_prefix;
  verdict.text = "Verdict:";
  FormatRule rationale;
  rationale.kind = FormatRule::Kind::other_nonblank_line;
  rationale.text = "Verdict:";
  return FormatSpec({verdict, rationale});
}

FormatSpec FormatSpec::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("rules") || !j.at("rules").is_array()) {
    throw config_error("format_spec", "format spec must be {\"rules\": [...]}");
  }
  std::vector<FormatRule> rules;
  for (const auto& rj : j.at("rules")) {
    FormatRule rule;
    const std::string type = rj.value("type", "");
    if (type == "boxed_count") {
      rule.kind = FormatRule::Kind::boxed_count;
      rule.count = rj.value("count", 1);
    } else if (type == "line_prefix") {
      rule.kind = FormatRule::Kind::line_prefix;
      rule.text = rj.at("prefix").get<std::string>();
    } else if (type == "other_nonblank_line") {
      rule.kind = FormatRule::Kind::other_nonblank_line;
      rule.text = rj.at("prefix").get<std::string>();
    } else if (type == "forbidden_substring") {
      rule.kind = FormatRule::Kind::forbidden_substring;
      rule.text = rj.at("substring").get<std::string>();
    } else {
      throw config_error("format_spec", "unknown format rule type: " + type);
    }
    rules.push_back(std::move(rule));
  }
  return FormatSpec(std::move(rules));
}

nlohmann::json FormatSpec::to_json() const {
  nlohmann::json rules = nlohmann::json::array();
  for (const auto& rule : rules_) {
    nlohmann::json rj;
    switch (rule.kind) {
      case FormatRule::Kind::boxed_count:
        rj["type"] = "boxed_count";
        rj["count"] = rule.count;
        break;
      case FormatRule::Kind::line_prefix:
        rj["type"] = "line_prefix";
        rj["prefix"] = rule.text;
        break;
      case FormatRule::Kind::other_nonblank_line:
        rj["type"] = "other_nonblank_line";
        rj["prefix"] = rule.text;
        break;
      case FormatRule::Kind::forbidden_substring:
        rj["type"] = "forbidden_substring";
        rj["substring"] = rule.text;
        break;
    }
    rules.push_back(std::move(rj));
  }
  return nlohmann::json{{"rules", rules}};
}

}  // namespace hsg
