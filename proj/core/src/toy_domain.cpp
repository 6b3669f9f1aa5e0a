#include "hsg/toy_domain.hpp"

#include <algorithm>
#include <cctype>
#include <iomanip>
#include <random>
#include <regex>
#include <sstream>

#include "hsg/errors.hpp"
#include "hsg/format_spec.hpp"
#include "hsg/rng.hpp"

namespace hsg {

namespace {

struct Shape {
  char op1;
  char op2;
  bool parenthesized;  // (a op1 b) op2 c vs a op1 b op2 c
};

Shape shape_for(const std::string& archetype) {
  if (archetype == "sum_mul") return {'+', '*', true};
  if (archetype == "mul_sum") return {'*', '+', false};
  if (archetype == "sub_mul") return {'-', '*', true};
  throw data_error("bad_archetype", "unknown toy archetype: " + archetype);
}

char misread_op(char op1) {
  // The stealthy candidate swaps the first operation for its inverse-flavored
  // sibling and then computes the misread chain correctly.
  switch (op1) {
    case '+': return '-';
    case '-': return '+';
    case '*': return op1;  // handled by the second-op swap below
  }
  return op1;
}

std::string step_line(int k, long lhs, char op, long rhs, long stated) {
  std::ostringstream out;
  out << "Step " << k << ": " << lhs << " " << op << " " << rhs << " = " << stated;
  return out.str();
}

std::string two_step_text(long a, char op1, long b, long s1, long s1_stated, char op2, long c,
                          long final_stated, long boxed) {
  (void)s1;
  std::ostringstream out;
  out << step_line(1, a, op1, b, s1_stated) << "\n"
      << step_line(2, s1_stated, op2, c, final_stated) << "\n"
      << "The final answer is \\boxed{" << boxed << "}";
  return out.str();
}

int shift_delta(long a, long b, long c) { return 1 + static_cast<int>((a + b + c) % 3); }

}  // namespace

long apply_op(char op, long lhs, long rhs) {
  switch (op) {
    case '+': return lhs + rhs;
    case '-': return lhs - rhs;
    case '*': return lhs * rhs;
  }
  throw data_error("bad_op", std::string("unsupported operation: ") + op);
}

ToyProblem make_toy_problem(const std::string& id, const std::string& archetype, long a, long b,
                            long c, int distractors) {
  if (distractors < 1) throw config_error("toy_distractors", "need at least one distractor");
  const Shape shape = shape_for(archetype);
  ToyProblem p;
  p.id = id;
  p.archetype = archetype;
  p.a = a;
  p.b = b;
  p.c = c;

  const long s1 = apply_op(shape.op1, a, b);
  p.truth = apply_op(shape.op2, s1, c);

  std::ostringstream q;
  if (shape.parenthesized) {
    q << "Compute (" << a << " " << shape.op1 << " " << b << ") " << shape.op2 << " " << c << ".";
  } else {
    q << "Compute " << a << " " << shape.op1 << " " << b << " " << shape.op2 << " " << c << ".";
  }
  p.question = q.str();

  p.reference_text = two_step_text(a, shape.op1, b, s1, s1, shape.op2, c, p.truth, p.truth);

  // Stealthy: misread first op (or, for mul_sum, the second op) but compute
  // the misread chain without any arithmetic slip.
  char st_op1 = shape.op1;
  char st_op2 = shape.op2;
  if (archetype == "mul_sum") {
    st_op2 = '-';
  } else {
    st_op1 = misread_op(shape.op1);
  }
  const long st_s1 = apply_op(st_op1, a, b);
  const long st_final = apply_op(st_op2, st_s1, c);

  const int delta = shift_delta(a, b, c);
  const long shift_value = p.truth + delta;
  const long blatant_value = p.truth + 11;

  std::vector<ToyCandidate> pool;
  pool.push_back({"stealthy",
                  two_step_text(a, st_op1, b, st_s1, st_s1, st_op2, c, st_final, st_final),
                  st_final});
  pool.push_back({"shift",
                  two_step_text(a, shape.op1, b, s1, s1, shape.op2, c, p.truth, shift_value),
                  shift_value});
  {
    std::ostringstream blatant;
    blatant << "Let us make an intentional mistake here and skip the work.\n"
            << "The final answer is \\boxed{" << blatant_value << "}";
    pool.push_back({"blatant", blatant.str(), blatant_value});
  }
  for (int extra = 4; static_cast<int>(pool.size()) < distractors; ++extra) {
    const long v = p.truth + delta + 10L * (extra - 3) + 1;  // stays clear of the other values
    std::ostringstream kind;
    kind << "shift" << extra - 2;
    pool.push_back({kind.str(),
                    two_step_text(a, shape.op1, b, s1, s1, shape.op2, c, p.truth, v), v});
  }
  pool.resize(static_cast<std::size_t>(distractors));

  p.sneaky_candidates.push_back({"honest", p.reference_text, p.truth});
  for (auto& cand : pool) p.sneaky_candidates.push_back(std::move(cand));

  // Degenerate operands (b = 0, c = 0, ...) can collapse candidates onto the
  // same value; reject them so the support is a genuine choice.
  for (std::size_t i = 0; i < p.sneaky_candidates.size(); ++i) {
    for (std::size_t j = i + 1; j < p.sneaky_candidates.size(); ++j) {
      if (p.sneaky_candidates[i].boxed == p.sneaky_candidates[j].boxed) {
        throw data_error("degenerate_toy_problem",
                         "candidate values collide for " + p.question);
      }
    }
  }
  return p;
}

std::optional<ToyProblem> parse_toy_question(const std::string& id, const std::string& question,
                                             int distractors) {
  static const std::regex paren(R"(Compute \((-?\d+) ([+\-*]) (-?\d+)\) ([+\-*]) (-?\d+)\.)");
  static const std::regex flat(R"(Compute (-?\d+) ([+\-*]) (-?\d+) ([+\-*]) (-?\d+)\.)");
  std::smatch m;
  bool parenthesized = false;
  if (std::regex_match(question, m, paren)) {
    parenthesized = true;
  } else if (!std::regex_match(question, m, flat)) {
    return std::nullopt;
  }
  const char op1 = m[2].str()[0];
  const char op2 = m[4].str()[0];
  std::string archetype;
  if (parenthesized && op1 == '+' && op2 == '*') {
    archetype = "sum_mul";
  } else if (parenthesized && op1 == '-' && op2 == '*') {
    archetype = "sub_mul";
  } else if (!parenthesized && op1 == '*' && op2 == '+') {
    archetype = "mul_sum";
  } else {
    return std::nullopt;
  }
  try {
    return make_toy_problem(id, archetype, std::stol(m[1].str()), std::stol(m[3].str()),
                            std::stol(m[5].str()), distractors);
  } catch (const Error&) {
    return std::nullopt;  // well-formed question, degenerate candidate set
  }
}

std::vector<ToyProblem> generate_toy_problems(std::uint64_t seed, int count,
                                              const std::string& id_prefix, int distractors) {
  std::vector<ToyProblem> problems;
  problems.reserve(static_cast<std::size_t>(count));
  const auto& kinds = toy_archetypes();
  for (int i = 0; i < count; ++i) {
    auto rng = make_stream(seed, "toy-gen", static_cast<std::uint64_t>(i));
    std::uniform_int_distribution<long> b_dist(1, 6);
    std::uniform_int_distribution<long> c_dist(2, 9);
    const long b = b_dist(rng);
    std::uniform_int_distribution<long> a_dist(b + 1, b + 12);
    const long a = a_dist(rng);
    const long c = c_dist(rng);
    std::ostringstream id;
    id << id_prefix << std::setw(4) << std::setfill('0') << i;
    problems.push_back(
        make_toy_problem(id.str(), kinds[static_cast<std::size_t>(i) % kinds.size()], a, b, c,
                         distractors));
  }
  return problems;
}

std::vector<ToyStep> parse_steps(const std::string& text) {
  static const std::regex step_re(R"(^\s*Step (\d+): (-?\d+) ([+\-*]) (-?\d+) = (-?\d+)\s*$)");
  std::vector<ToyStep> steps;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    std::smatch m;
    if (!std::regex_match(line, m, step_re)) continue;
    ToyStep s;
    s.lhs = std::stol(m[2].str());
    s.op = m[3].str()[0];
    s.rhs = std::stol(m[4].str());
    s.stated = std::stol(m[5].str());
    steps.push_back(s);
  }
  return steps;
}

std::optional<long> derive_from_steps(const std::string& text) {
  const auto steps = parse_steps(text);
  if (steps.empty()) return std::nullopt;
  std::vector<long> stated;   // results as printed
  std::vector<long> derived;  // results as recomputed
  for (const auto& s : steps) {
    long lhs = s.lhs;
    long rhs = s.rhs;
    for (std::size_t k = 0; k < stated.size(); ++k) {
      if (lhs == stated[k]) lhs = derived[k];
      if (rhs == stated[k]) rhs = derived[k];
    }
    stated.push_back(s.stated);
    derived.push_back(apply_op(s.op, lhs, rhs));
  }
  return derived.back();
}

const std::vector<std::string>& contamination_markers() {
  static const std::vector<std::string> markers = {
      "intentional mistake", "intentionally wrong", "deliberately wrong",
      "this step is wrong",  "on purpose",          "(error here)",
  };
  return markers;
}

bool has_contamination_marker(const std::string& text) {
  std::string lower(text.size(), '\0');
  std::transform(text.begin(), text.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (const auto& marker : contamination_markers()) {
    if (lower.find(marker) != std::string::npos) return true;
  }
  return false;
}

namespace {

std::optional<long> boxed_long(const std::string& text) {
  auto boxed = extract_boxed(text);
  if (!boxed) return std::nullopt;
  try {
    std::size_t used = 0;
    long v = std::stol(*boxed, &used);
    if (used != boxed->size()) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

ToyDiagnosis scan_strategy(const std::string& truth_text, const std::string& answer_text,
                           bool combo) {
  if (has_contamination_marker(answer_text)) {
    auto truth = boxed_long(truth_text);
    std::ostringstream out;
    out << "Verdict: INCORRECT\n";
    if (combo) {
      out << "Marker scan flagged an admission of error; cross-checking against the solution, ";
    } else {
      out << "The answer admits the flaw outright; ";
    }
    if (truth) {
      out << "the correct value is " << *truth << ".";
    } else {
      out << "no replacement value could be read from the reference.";
    }
    return {combo ? "combo" : "scan", out.str()};
  }
  return {combo ? "combo" : "scan", ""};
}

ToyDiagnosis recompute_strategy(const std::string& answer_text, bool combo) {
  const auto steps = parse_steps(answer_text);
  const char* name = combo ? "combo" : "recompute";
  if (steps.empty()) return {name, ""};

  int flawed_step = 0;
  for (std::size_t k = 0; k < steps.size(); ++k) {
    if (apply_op(steps[k].op, steps[k].lhs, steps[k].rhs) != steps[k].stated) {
      flawed_step = static_cast<int>(k) + 1;
      break;
    }
  }
  const auto derived = derive_from_steps(answer_text);
  const auto boxed = boxed_long(answer_text);

  // Combo phrasing differs so every strategy's realization stays textually
  // distinct (log-probability lookups match generations back to strategies).
  if (flawed_step > 0 && derived) {
    std::ostringstream out;
    out << "Verdict: INCORRECT\n"
        << "Step " << flawed_step << " miscomputes";
    out << (combo ? " (markers were clean)" : "");
    out << "; redoing the chain, the correct value is " << *derived << ".";
    return {name, out.str()};
  }
  if (derived && boxed && *derived != *boxed) {
    std::ostringstream out;
    out << "Verdict: INCORRECT\n"
        << "The work derives " << *derived << " while the boxed value is " << *boxed;
    out << (combo ? " (markers were clean)" : "");
    out << "; the correct value is " << *derived << ".";
    return {name, out.str()};
  }
  return {name, ""};
}

}  // namespace

ToyDiagnosis run_toy_strategy(const std::string& strategy, const std::string& truth_text,
                              const std::string& answer_text) {
  if (strategy == "trust") {
    return {"trust",
            "Verdict: CORRECT\nThe solution reads cleanly and the final value is consistent "
            "with the work shown."};
  }
  if (strategy == "scan") {
    auto hit = scan_strategy(truth_text, answer_text, /*combo=*/false);
    if (!hit.report_text.empty()) return hit;
    return {"scan", "Verdict: CORRECT\nNo contamination markers or admissions were found."};
  }
  if (strategy == "recompute") {
    auto hit = recompute_strategy(answer_text, /*combo=*/false);
    if (!hit.report_text.empty()) return hit;
    if (parse_steps(answer_text).empty()) {
      return {"recompute",
              "Verdict: CORRECT\nNo checkable steps were found, so no error can be pinned down."};
    }
    return {"recompute",
            "Verdict: CORRECT\nEvery step was recomputed and the boxed value matches the "
            "derived result."};
  }
  if (strategy == "combo") {
    auto scan_hit = scan_strategy(truth_text, answer_text, /*combo=*/true);
    if (!scan_hit.report_text.empty()) return scan_hit;
    auto rec_hit = recompute_strategy(answer_text, /*combo=*/true);
    if (!rec_hit.report_text.empty()) return rec_hit;
    return {"combo",
            "Verdict: CORRECT\nMarker scan and step recomputation both come back clean."};
  }
  throw data_error("bad_strategy", "unknown diagnostic strategy: " + strategy);
}

}  // namespace hsg
