#include "hsg/checker.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <limits>
#include <numeric>

namespace hsg {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Strips $...$ wrappers, \text{...} wrappers, trailing periods, and
// thousand-separator commas between digits.
std::string strip_decoration(std::string s) {
  s = trim(s);
  while (s.size() >= 2 && s.front() == '$' && s.back() == '$') s = trim(s.substr(1, s.size() - 2));
  constexpr std::string_view text_cmd = "\\text{";
  if (s.starts_with(text_cmd) && s.ends_with("}")) {
    s = trim(s.substr(text_cmd.size(), s.size() - text_cmd.size() - 1));
  }
  while (!s.empty() && s.back() == '.') s.pop_back();
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == ',' && i > 0 && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i - 1])) &&
        std::isdigit(static_cast<unsigned char>(s[i + 1]))) {
      continue;
    }
    out.push_back(s[i]);
  }
  return out;
}

std::optional<std::int64_t> parse_int(const std::string& s) {
  if (s.empty()) return std::nullopt;
  std::size_t i = 0;
  bool neg = false;
  if (s[i] == '+' || s[i] == '-') {
    neg = s[i] == '-';
    ++i;
  }
  if (i == s.size() || s.size() - i > 18) return std::nullopt;
  std::int64_t value = 0;
  for (; i < s.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return std::nullopt;
    value = value * 10 + (s[i] - '0');
  }
  return neg ? -value : value;
}

Rational normalize(std::int64_t num, std::int64_t den) {
  if (den < 0) {
    num = -num;
    den = -den;
  }
  std::int64_t g = std::gcd(num < 0 ? -num : num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  if (num == 0) den = 1;
  return Rational{num, den};
}

std::optional<Rational> parse_fraction(const std::string& s, char sep_open, char sep_close) {
  // "\frac{a}{b}" shape; sep args keep the two brace scans readable.
  constexpr std::string_view frac = "\\frac";
  if (!s.starts_with(frac)) return std::nullopt;
  std::size_t i = frac.size();
  if (i >= s.size() || s[i] != sep_open) return std::nullopt;
  std::size_t close1 = s.find(sep_close, i + 1);
  if (close1 == std::string::npos) return std::nullopt;
  auto num = parse_int(s.substr(i + 1, close1 - i - 1));
  if (!num) return std::nullopt;
  std::size_t j = close1 + 1;
  if (j >= s.size() || s[j] != sep_open) return std::nullopt;
  std::size_t close2 = s.find(sep_close, j + 1);
  if (close2 == std::string::npos || close2 + 1 != s.size()) return std::nullopt;
  auto den = parse_int(s.substr(j + 1, close2 - j - 1));
  if (!den || *den == 0) return std::nullopt;
  return normalize(*num, *den);
}

}  // namespace

std::optional<Rational> CanonicalChecker::parse_rational(const std::string& raw) {
  std::string s = strip_decoration(raw);
  if (s.empty()) return std::nullopt;

  if (auto frac = parse_fraction(s, '{', '}')) return frac;

  std::size_t slash = s.find('/');
  if (slash != std::string::npos) {
    auto num = parse_int(s.substr(0, slash));
    auto den = parse_int(s.substr(slash + 1));
    if (!num || !den || *den == 0) return std::nullopt;
    return normalize(*num, *den);
  }

  std::size_t dot = s.find('.');
  if (dot != std::string::npos) {
    std::string head = s.substr(0, dot);
    std::string tail = s.substr(dot + 1);
    if (tail.empty() || tail.size() > 15) return std::nullopt;
    if (head.empty() || head == "+" || head == "-") head += "0";
    auto whole = parse_int(head);
    auto frac_digits = parse_int(tail);
    if (!whole || !frac_digits || *frac_digits < 0) return std::nullopt;
    std::int64_t scale = 1;
    for (std::size_t k = 0; k < tail.size(); ++k) scale *= 10;
    const std::int64_t magnitude = *whole < 0 ? -*whole : *whole;
    if (magnitude > (std::numeric_limits<std::int64_t>::max() - *frac_digits) / scale) {
      return std::nullopt;  // would overflow: fall back to symbolic comparison
    }
    bool neg = !head.empty() && head[0] == '-';
    std::int64_t num = *whole * scale + (neg ? -*frac_digits : *frac_digits);
    return normalize(num, scale);
  }

  auto value = parse_int(s);
  if (!value) return std::nullopt;
  return Rational{*value, 1};
}

std::string CanonicalChecker::canonical_symbol(const std::string& raw) {
  std::string s = strip_decoration(raw);
  std::string out;
  bool pending_space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

bool CanonicalChecker::equivalent(const std::string& candidate, const std::string& reference) const {
  auto lhs = parse_rational(candidate);
  auto rhs = parse_rational(reference);
  if (lhs && rhs) return *lhs == *rhs;
  if (lhs.has_value() != rhs.has_value()) return false;
  return canonical_symbol(candidate) == canonical_symbol(reference);
}

}  // namespace hsg
