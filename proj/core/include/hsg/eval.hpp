#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hsg/checker.hpp"
#include "hsg/policy.hpp"
#include "hsg/toy_domain.hpp"

namespace hsg {

struct EvalProblem {
  std::string id;
  std::string question;
  std::string reference_text;
};

/// One measurement item: a problem, one erroneous answer, and the two
/// competing diagnostics (the baseline model's own D and the trained D*).
/// Outcome and judge fields, when present, replace live backend calls so the
/// published counts can be replayed without the original models.
struct EvalItem {
  EvalProblem problem;
  std::string a_s_text;
  std::string diag_d_text;
  std::string diag_dstar_text;
  std::optional<bool> outcome_d;       // correction success under D
  std::optional<bool> outcome_dstar;   // correction success under D*
  std::optional<std::string> judge_pref_first;   // positional: "A" | "B" | "TIE"
  std::optional<std::string> judge_pref_second;  // second pass, order swapped

  static EvalItem from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

std::vector<EvalItem> load_eval_items(const std::filesystem::path& jsonl_path);

enum class Diagnostic { d, dstar };

struct AccResult {
  long successes = 0;
  long counted = 0;
  long excluded = 0;  // backend failures, counted separately
  double acc() const { return counted == 0 ? 0.0 : static_cast<double>(successes) / counted; }
};

/// Correction success rate when correction is guided by the chosen diagnostic.
/// Items with precomputed outcomes use them; otherwise the corrector runs.
AccResult acc_corr(const std::vector<EvalItem>& items, Diagnostic which, Policy& corrector,
                   const AnswerChecker& checker, const Tokenizer& tokenizer);

/// Correction failure rate 1 - ACC_corr of the trained diagnostic's targets.
double stealthiness(const std::vector<EvalItem>& items, Diagnostic which, Policy& corrector,
                    const AnswerChecker& checker, const Tokenizer& tokenizer);

// -- pairwise judging with positional de-biasing --

enum class Pref { a_better, b_better, tie };

struct JudgeVerdict {
  Pref first_pass = Pref::tie;   // semantic (de-swapped) preference, pass 1
  Pref second_pass = Pref::tie;  // semantic preference, pass 2 (presented swapped)
  enum class Aggregate { win, tie, loss } aggregate = Aggregate::tie;
  bool unparseable = false;  // neither pass yielded a recognizable preference
};

/// win iff A preferred in both passes, loss iff B in both, tie otherwise.
JudgeVerdict::Aggregate aggregate_passes(Pref first, Pref second);

/// Two judge calls with the argument order swapped; positional preferences are
/// de-swapped before aggregation, so a purely positional judge always ties.
JudgeVerdict judge_pair(Policy& judge, const EvalProblem& problem, const std::string& a_s,
                        const std::string& diag_a, const std::string& diag_b,
                        std::uint64_t seed = 0);

/// Judge reply grammar: a "Choice:" line (or the whole reply) saying A, B or
/// TIE, case-insensitive.
std::optional<Pref> parse_judge_choice(const std::string& reply);

struct WinRate {
  long wins = 0;
  long ties = 0;
  long losses = 0;
  double rate = 0.0;  // (wins - losses) / total
};

WinRate win_rate(const std::vector<JudgeVerdict>& verdicts);

/// Judges every item (diag_dstar as A, diag_d as B), fanning calls out with at
/// most `max_in_flight` concurrent pairs. Results come back in item order, so
/// the reduction is deterministic regardless of completion order.
std::vector<JudgeVerdict> judge_items(Policy& judge, const std::vector<EvalItem>& items,
                                      int max_in_flight = 4, std::uint64_t seed = 0);

// -- error-type taxonomy --

struct ErrorTypeLabel {
  bool has_type_a = false;  // result shift: reasoning correct, final differs
  bool has_type_b = false;  // explicit contamination: markers or contradictions
  bool low_confidence = false;
};

class StepVerifier {
 public:
  enum class Result { all_correct, flawed, unverifiable };
  virtual ~StepVerifier() = default;
  virtual Result verify(const EvalProblem& problem, const std::string& answer_text) = 0;
};

/// Exact verification on toy traces: parses the expression from the question
/// and checks that every step is arithmetically right, grounded in the
/// question's operands, and chained correctly.
class ToyStepVerifier : public StepVerifier {
 public:
  Result verify(const EvalProblem& problem, const std::string& answer_text) override;
};

struct TypeBDetectors {
  std::vector<std::string> markers = contamination_markers();
  bool check_contradictions = true;

  bool fire(const std::string& text) const;
};

ErrorTypeLabel classify_error_type(const EvalProblem& problem, const std::string& a_s_text,
                                   const AnswerChecker& checker, StepVerifier* verifier,
                                   const TypeBDetectors& detectors = {});

struct ErrorTypeDistribution {
  double a_only = 0.0;
  double b_only = 0.0;
  double both = 0.0;
  double neither = 0.0;
};

ErrorTypeDistribution error_type_distribution(const std::vector<ErrorTypeLabel>& labels);

// -- fixture tables and report rendering --

struct Table1Cell {
  std::string dataset;
  long trials = 0;
  long successes_d = 0;
  long successes_dstar = 0;
};

struct Table1Row {
  std::string model;
  std::vector<Table1Cell> cells;
};

std::vector<Table1Row> load_table1_counts(const std::filesystem::path& path);

struct Table2Row {
  std::string model;
  long win = 0;
  long tie = 0;
  long loss = 0;
};

std::vector<Table2Row> load_table2_counts(const std::filesystem::path& path);

/// "44.50" (two decimals, no % sign).
std::string format_percent(double fraction);

nlohmann::json table1_report(const std::vector<Table1Row>& rows);
nlohmann::json table2_report(const std::vector<Table2Row>& rows);
std::string render_table1_text(const nlohmann::json& report);
std::string render_table2_text(const nlohmann::json& report);

}  // namespace hsg
