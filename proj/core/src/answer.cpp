#include "hsg/answer.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "hsg/errors.hpp"
#include "hsg/format_spec.hpp"

namespace hsg {

const char* to_string(Role role) {
  switch (role) {
    case Role::sneaky: return "sneaky";
    case Role::correction: return "correction";
    case Role::reference: return "reference";
  }
  return "?";
}

const char* to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::claims_error: return "claims_error";
    case Verdict::claims_correct: return "claims_correct";
    case Verdict::unparseable: return "unparseable";
  }
  return "?";
}

Role role_from_string(const std::string& s) {
  if (s == "sneaky") return Role::sneaky;
  if (s == "correction") return Role::correction;
  if (s == "reference") return Role::reference;
  throw data_error("bad_role", "unknown role: " + s);
}

Verdict verdict_from_string(const std::string& s) {
  if (s == "claims_error") return Verdict::claims_error;
  if (s == "claims_correct") return Verdict::claims_correct;
  if (s == "unparseable") return Verdict::unparseable;
  throw data_error("bad_verdict", "unknown verdict: " + s);
}

Answer make_answer(std::string text, Role role, const Tokenizer& tokenizer) {
  Answer a;
  a.length = tokenizer.count(text);
  a.final_value = extract_boxed(text);
  a.text = std::move(text);
  a.role = role;
  return a;
}

DiagnosticReport make_report(std::string text, const Tokenizer& tokenizer) {
  DiagnosticReport r;
  r.length = tokenizer.count(text);
  r.verdict = parse_verdict(text);
  r.text = std::move(text);
  return r;
}

Verdict parse_verdict(const std::string& text) {
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    std::size_t i = line.find_first_not_of(" \t\r");
    if (i == std::string::npos) continue;
    constexpr std::string_view prefix = "Verdict:";
    if (line.compare(i, prefix.size(), prefix) != 0) continue;
    std::size_t start = i + prefix.size();
    while (start < line.size() && (line[start] == ' ' || line[start] == '\t')) ++start;
    std::size_t end = start;
    while (end < line.size() && !std::isspace(static_cast<unsigned char>(line[end]))) ++end;
    std::string word = line.substr(start, end - start);
    std::transform(word.begin(), word.end(), word.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    while (!word.empty() && (word.back() == '.' || word.back() == ',' || word.back() == '!')) {
      word.pop_back();
    }
    if (word == "INCORRECT" || word == "WRONG" || word == "ERROR") return Verdict::claims_error;
    if (word == "CORRECT" || word == "OK") return Verdict::claims_correct;
    return Verdict::unparseable;
  }
  return Verdict::unparseable;
}

}  // namespace hsg
