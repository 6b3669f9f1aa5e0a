#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hsg {

// A deliberately small arithmetic world where the hide-and-seek dynamic is
// observable at desk scale. Each problem is a two-step expression; the sneaky
// support holds the reference answer plus distractors whose flaws differ in
// how detectable they are:
//   honest   — the reference derivation (correct)
//   stealthy — misreads the expression's first operation but computes the
//              misread chain flawlessly (internally consistent, no markers)
//   shift    — correct derivation, shifted boxed value (result shift)
//   blatant  — a self-admitted error with no checkable work (contamination)

struct ToyStep {
  long lhs = 0;
  long rhs = 0;
  char op = '+';
  long stated = 0;  // result printed in the text
};

struct ToyCandidate {
  std::string kind;  // honest | stealthy | shift | blatant | shift2 | shift3 ...
  std::string text;
  long boxed = 0;
};

struct ToyProblem {
  std::string id;
  std::string archetype;  // sum_mul: (a+b)*c | mul_sum: a*b+c | sub_mul: (a-b)*c
  long a = 0;
  long b = 0;
  long c = 0;
  long truth = 0;
  std::string question;
  std::string reference_text;  // identical to the honest candidate
  std::vector<ToyCandidate> sneaky_candidates;
};

inline const std::vector<std::string>& toy_archetypes() {
  static const std::vector<std::string> kinds = {"sum_mul", "mul_sum", "sub_mul"};
  return kinds;
}

/// Builds a problem and its candidate support from the archetype and numbers.
/// `distractors` counts non-reference candidates (>=1; 3 gives the canonical
/// stealthy / shift / blatant trio, larger values append further shifts).
ToyProblem make_toy_problem(const std::string& id, const std::string& archetype, long a, long b,
                            long c, int distractors = 3);

/// Reconstructs the problem (candidates included) from its question text, so
/// the support is derivable from a dataset record alone.
std::optional<ToyProblem> parse_toy_question(const std::string& id, const std::string& question,
                                             int distractors = 3);

/// Seeded generator cycling through the archetypes.
std::vector<ToyProblem> generate_toy_problems(std::uint64_t seed, int count,
                                              const std::string& id_prefix,
                                              int distractors = 3);

// -- step traces --

/// Parses "Step k: <lhs> <op> <rhs> = <result>" lines.
std::vector<ToyStep> parse_steps(const std::string& text);

long apply_op(char op, long lhs, long rhs);

/// Recomputes the chain from the answer's own steps: each step is re-evaluated
/// and operands equal to an earlier step's *stated* value are replaced by the
/// recomputed one. Returns the final recomputed value, if any step parsed.
std::optional<long> derive_from_steps(const std::string& text);

// -- diagnostic strategies (the toy diagnosis support) --

// The diagnosis policy samples a detection strategy; the report text is the
// strategy applied to (a_truth, a_S). Strategies are deliberately bounded:
// none re-derives the problem from scratch, so an internally consistent
// misreading evades all of them.
//   trust     — always accepts
//   scan      — flags contamination markers only; cites the reference value
//   recompute — re-checks the answer's own arithmetic and final-value match;
//               cites the value derived from the answer's steps
//   combo     — scan, then recompute
struct ToyDiagnosis {
  std::string strategy;
  std::string report_text;
};

inline const std::vector<std::string>& toy_strategies() {
  static const std::vector<std::string> names = {"trust", "scan", "recompute", "combo"};
  return names;
}

/// Marker phrases the scan strategy (and the Type-B detectors) look for.
const std::vector<std::string>& contamination_markers();

bool has_contamination_marker(const std::string& text);

ToyDiagnosis run_toy_strategy(const std::string& strategy, const std::string& truth_text,
                              const std::string& answer_text);

}  // namespace hsg
