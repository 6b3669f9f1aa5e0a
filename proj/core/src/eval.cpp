#include "hsg/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <future>
#include <regex>
#include <sstream>

#include "hsg/errors.hpp"
#include "hsg/format_spec.hpp"

namespace hsg {

EvalItem EvalItem::from_json(const nlohmann::json& j) {
  EvalItem item;
  item.problem.id = j.value("id", "");
  item.problem.question = j.value("question", "");
  item.problem.reference_text = j.at("reference").get<std::string>();
  item.a_s_text = j.at("a_s").get<std::string>();
  item.diag_d_text = j.value("diag_d", "");
  item.diag_dstar_text = j.value("diag_dstar", "");
  if (j.contains("outcome_d")) item.outcome_d = j.at("outcome_d").get<bool>();
  if (j.contains("outcome_dstar")) item.outcome_dstar = j.at("outcome_dstar").get<bool>();
  if (j.contains("judge_pref_first")) {
    item.judge_pref_first = j.at("judge_pref_first").get<std::string>();
  }
  if (j.contains("judge_pref_second")) {
    item.judge_pref_second = j.at("judge_pref_second").get<std::string>();
  }
  return item;
}

nlohmann::json EvalItem::to_json() const {
  nlohmann::json j{{"id", problem.id},
                   {"question", problem.question},
                   {"reference", problem.reference_text},
                   {"a_s", a_s_text},
                   {"diag_d", diag_d_text},
                   {"diag_dstar", diag_dstar_text}};
  if (outcome_d) j["outcome_d"] = *outcome_d;
  if (outcome_dstar) j["outcome_dstar"] = *outcome_dstar;
  if (judge_pref_first) j["judge_pref_first"] = *judge_pref_first;
  if (judge_pref_second) j["judge_pref_second"] = *judge_pref_second;
  return j;
}

std::vector<EvalItem> load_eval_items(const std::filesystem::path& jsonl_path) {
  std::ifstream in(jsonl_path);
  if (!in) throw data_error("missing_file", "cannot open items file: " + jsonl_path.string());
  std::vector<EvalItem> items;
  std::string line;
  long line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      items.push_back(EvalItem::from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw data_error("bad_fixture", "items line " + std::to_string(line_number) + ": " + e.what());
    }
  }
  if (items.empty()) {
    throw data_error("empty_fixture", "no evaluation items in " + jsonl_path.string());
  }
  return items;
}

AccResult acc_corr(const std::vector<EvalItem>& items, Diagnostic which, Policy& corrector,
                   const AnswerChecker& checker, const Tokenizer& tokenizer) {
  AccResult result;
  for (const auto& item : items) {
    const auto& outcome = which == Diagnostic::d ? item.outcome_d : item.outcome_dstar;
    if (outcome) {
      ++result.counted;
      if (*outcome) ++result.successes;
      continue;
    }
    try {
      const Answer a_s = make_answer(item.a_s_text, Role::sneaky, tokenizer);
      const Answer reference = make_answer(item.problem.reference_text, Role::reference, tokenizer);
      if (!reference.final_value) throw data_error("bad_fixture", "reference not extractable");
      const DiagnosticReport report = make_report(
          which == Diagnostic::d ? item.diag_d_text : item.diag_dstar_text, tokenizer);
      const Answer a_c = correct_answer(corrector, a_s, report, tokenizer);
      ++result.counted;
      if (a_c.final_value && checker.equivalent(*a_c.final_value, *reference.final_value)) {
        ++result.successes;
      }
    } catch (const Error&) {
      ++result.excluded;  // backend failure: excluded, tracked separately
    }
  }
  return result;
}

double stealthiness(const std::vector<EvalItem>& items, Diagnostic which, Policy& corrector,
                    const AnswerChecker& checker, const Tokenizer& tokenizer) {
  return 1.0 - acc_corr(items, which, corrector, checker, tokenizer).acc();
}

JudgeVerdict::Aggregate aggregate_passes(Pref first, Pref second) {
  if (first == Pref::a_better && second == Pref::a_better) return JudgeVerdict::Aggregate::win;
  if (first == Pref::b_better && second == Pref::b_better) return JudgeVerdict::Aggregate::loss;
  return JudgeVerdict::Aggregate::tie;
}

std::optional<Pref> parse_judge_choice(const std::string& reply) {
  auto classify = [](std::string token) -> std::optional<Pref> {
    std::transform(token.begin(), token.end(), token.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    while (!token.empty() && (token.back() == '.' || token.back() == '!')) token.pop_back();
    if (token == "A" || token == "FIRST") return Pref::a_better;
    if (token == "B" || token == "SECOND") return Pref::b_better;
    if (token == "TIE" || token == "EQUAL") return Pref::tie;
    return std::nullopt;
  };

  std::istringstream lines(reply);
  std::string line;
  while (std::getline(lines, line)) {
    const std::size_t pos = line.find("Choice:");
    if (pos == std::string::npos) continue;
    std::istringstream rest(line.substr(pos + 7));
    std::string token;
    if (rest >> token) return classify(token);
  }
  // Bare replies ("A", "tie") are accepted too.
  std::istringstream whole(reply);
  std::string token;
  if (whole >> token) {
    std::string extra;
    if (!(whole >> extra)) return classify(token);
  }
  return std::nullopt;
}

JudgeVerdict judge_pair(Policy& judge, const EvalProblem& problem, const std::string& a_s,
                        const std::string& diag_a, const std::string& diag_b,
                        std::uint64_t seed) {
  auto ask = [&](const std::string& first, const std::string& second,
                 std::uint64_t pass) -> std::optional<Pref> {
    RoleContext ctx{Actor::judge,
                    "judge",
                    {{"q", problem.question},
                     {"a_s", a_s},
                     {"diag_first", first},
                     {"diag_second", second}}};
    auto generations = judge.sample(ctx, 1, seed + pass);
    return parse_judge_choice(generations.front().text);
  };

  const auto raw_first = ask(diag_a, diag_b, 0);
  const auto raw_second = ask(diag_b, diag_a, 1);

  JudgeVerdict verdict;
  verdict.unparseable = !raw_first && !raw_second;
  // De-swap pass 2: a positional "A" there means diag_b was preferred.
  auto flip = [](Pref p) {
    if (p == Pref::a_better) return Pref::b_better;
    if (p == Pref::b_better) return Pref::a_better;
    return Pref::tie;
  };
  verdict.first_pass = raw_first.value_or(Pref::tie);
  verdict.second_pass = raw_second ? flip(*raw_second) : Pref::tie;
  verdict.aggregate = aggregate_passes(verdict.first_pass, verdict.second_pass);
  return verdict;
}

std::vector<JudgeVerdict> judge_items(Policy& judge, const std::vector<EvalItem>& items,
                                      int max_in_flight, std::uint64_t seed) {
  if (max_in_flight < 1) throw config_error("judge_fanout", "max_in_flight must be >= 1");
  std::vector<JudgeVerdict> verdicts(items.size());
  std::size_t next = 0;
  while (next < items.size()) {
    const std::size_t window =
        std::min(items.size() - next, static_cast<std::size_t>(max_in_flight));
    std::vector<std::future<JudgeVerdict>> in_flight;
    for (std::size_t k = 0; k < window; ++k) {
      const std::size_t i = next + k;
      in_flight.push_back(std::async(std::launch::async, [&judge, &items, i, seed] {
        const auto& item = items[i];
        return judge_pair(judge, item.problem, item.a_s_text, item.diag_dstar_text,
                          item.diag_d_text, seed + 2 * i);
      }));
    }
    for (std::size_t k = 0; k < window; ++k) verdicts[next + k] = in_flight[k].get();
    next += window;
  }
  return verdicts;
}

WinRate win_rate(const std::vector<JudgeVerdict>& verdicts) {
  if (verdicts.empty()) throw data_error("empty_fixture", "win rate over an empty verdict list");
  WinRate wr;
  for (const auto& v : verdicts) {
    switch (v.aggregate) {
      case JudgeVerdict::Aggregate::win: ++wr.wins; break;
      case JudgeVerdict::Aggregate::tie: ++wr.ties; break;
      case JudgeVerdict::Aggregate::loss: ++wr.losses; break;
    }
  }
  const double total = static_cast<double>(wr.wins + wr.ties + wr.losses);
  wr.rate = (static_cast<double>(wr.wins) - static_cast<double>(wr.losses)) / total;
  return wr;
}

StepVerifier::Result ToyStepVerifier::verify(const EvalProblem& problem,
                                             const std::string& answer_text) {
  const auto toy = parse_toy_question(problem.id, problem.question);
  if (!toy) return Result::unverifiable;
  const auto steps = parse_steps(answer_text);
  if (steps.empty()) return Result::unverifiable;

  for (const auto& s : steps) {
    if (apply_op(s.op, s.lhs, s.rhs) != s.stated) return Result::flawed;
  }

  // Grounding: the trace must be the question's own two-step plan, not a
  // flawless derivation of some other expression.
  const auto expected = parse_steps(toy->reference_text);
  if (steps.size() != expected.size()) return Result::flawed;
  for (std::size_t k = 0; k < steps.size(); ++k) {
    if (steps[k].op != expected[k].op || steps[k].lhs != expected[k].lhs ||
        steps[k].rhs != expected[k].rhs) {
      return Result::flawed;
    }
  }
  return Result::all_correct;
}

bool TypeBDetectors::fire(const std::string& text) const {
  std::string lower(text.size(), '\0');
  std::transform(text.begin(), text.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (const auto& marker : markers) {
    if (lower.find(marker) != std::string::npos) return true;
  }
  if (!check_contradictions) return false;

  // Contradiction 1: the same expression stated twice with different results.
  const auto steps = parse_steps(text);
  for (std::size_t i = 0; i < steps.size(); ++i) {
    for (std::size_t j = i + 1; j < steps.size(); ++j) {
      if (steps[i].lhs == steps[j].lhs && steps[i].rhs == steps[j].rhs &&
          steps[i].op == steps[j].op && steps[i].stated != steps[j].stated) {
        return true;
      }
    }
  }

  // Contradiction 2: a bare restated final ("the final answer is 12") that
  // disagrees with the boxed value.
  static const std::regex final_re(R"(final answer is (-?\d+))", std::regex::icase);
  std::smatch m;
  if (std::regex_search(text, m, final_re)) {
    if (auto boxed = extract_boxed(text)) {
      try {
        std::size_t used = 0;
        const long boxed_value = std::stol(*boxed, &used);
        if (used == boxed->size() && std::stol(m[1].str()) != boxed_value) return true;
      } catch (const std::exception&) {
        // non-integer boxed content: no claim either way
      }
    }
  }
  return false;
}

ErrorTypeLabel classify_error_type(const EvalProblem& problem, const std::string& a_s_text,
                                   const AnswerChecker& checker, StepVerifier* verifier,
                                   const TypeBDetectors& detectors) {
  ErrorTypeLabel label;
  label.has_type_b = detectors.fire(a_s_text);

  const auto answer_value = extract_boxed(a_s_text);
  const auto reference_value = extract_boxed(problem.reference_text);
  const bool final_differs = answer_value && reference_value &&
                             !checker.equivalent(*answer_value, *reference_value);

  if (verifier == nullptr) {
    label.low_confidence = true;
    return label;
  }
  if (final_differs &&
      verifier->verify(problem, a_s_text) == StepVerifier::Result::all_correct) {
    label.has_type_a = true;
  }
  return label;
}

ErrorTypeDistribution error_type_distribution(const std::vector<ErrorTypeLabel>& labels) {
  if (labels.empty()) throw data_error("empty_fixture", "error-type distribution of no labels");
  ErrorTypeDistribution dist;
  for (const auto& label : labels) {
    if (label.has_type_a && label.has_type_b) {
      dist.both += 1.0;
    } else if (label.has_type_a) {
      dist.a_only += 1.0;
    } else if (label.has_type_b) {
      dist.b_only += 1.0;
    } else {
      dist.neither += 1.0;
    }
  }
  const double n = static_cast<double>(labels.size());
  dist.a_only /= n;
  dist.b_only /= n;
  dist.both /= n;
  dist.neither /= n;
  return dist;
}

std::string format_percent(double fraction) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.2f", fraction * 100.0);
  return buffer;
}

std::vector<Table1Row> load_table1_counts(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw data_error("missing_file", "cannot open table fixture: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw data_error("bad_fixture", std::string("table fixture is not valid JSON: ") + e.what());
  }
  std::vector<Table1Row> rows;
  for (const auto& rj : j.at("rows")) {
    Table1Row row;
    row.model = rj.at("model").get<std::string>();
    for (const auto& cj : rj.at("cells")) {
      Table1Cell cell;
      cell.dataset = cj.at("dataset").get<std::string>();
      cell.trials = cj.at("trials").get<long>();
      cell.successes_d = cj.at("d").get<long>();
      cell.successes_dstar = cj.at("dstar").get<long>();
      if (cell.trials <= 0 || cell.successes_d > cell.trials ||
          cell.successes_dstar > cell.trials) {
        throw data_error("bad_fixture", "inconsistent counts for " + row.model);
      }
      row.cells.push_back(std::move(cell));
    }
    if (row.cells.empty()) throw data_error("bad_fixture", "row without cells: " + row.model);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw data_error("empty_fixture", "table fixture has no rows");
  return rows;
}

std::vector<Table2Row> load_table2_counts(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw data_error("missing_file", "cannot open table fixture: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw data_error("bad_fixture", std::string("table fixture is not valid JSON: ") + e.what());
  }
  std::vector<Table2Row> rows;
  for (const auto& rj : j.at("rows")) {
    Table2Row row;
    row.model = rj.at("model").get<std::string>();
    row.win = rj.at("win").get<long>();
    row.tie = rj.at("tie").get<long>();
    row.loss = rj.at("loss").get<long>();
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw data_error("empty_fixture", "table fixture has no rows");
  return rows;
}

nlohmann::json table1_report(const std::vector<Table1Row>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& row : rows) {
    nlohmann::json cells = nlohmann::json::array();
    double sum_d = 0.0;
    double sum_dstar = 0.0;
    for (const auto& cell : row.cells) {
      const double pct_d = 100.0 * static_cast<double>(cell.successes_d) / static_cast<double>(cell.trials);
      const double pct_dstar = 100.0 * static_cast<double>(cell.successes_dstar) / static_cast<double>(cell.trials);
      sum_d += pct_d;
      sum_dstar += pct_dstar;
      cells.push_back({{"dataset", cell.dataset},
                       {"acc_d", format_percent(pct_d / 100.0)},
                       {"acc_dstar", format_percent(pct_dstar / 100.0)}});
    }
    const double aver_d = sum_d / static_cast<double>(row.cells.size());
    const double aver_dstar = sum_dstar / static_cast<double>(row.cells.size());
    out.push_back({{"model", row.model},
                   {"cells", cells},
                   {"aver_d", format_percent(aver_d / 100.0)},
                   {"aver_dstar", format_percent(aver_dstar / 100.0)},
                   {"uplift", format_percent((aver_dstar - aver_d) / 100.0)}});
  }
  return out;
}

nlohmann::json table2_report(const std::vector<Table2Row>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& row : rows) {
    std::vector<JudgeVerdict> verdicts;
    verdicts.reserve(static_cast<std::size_t>(row.win + row.tie + row.loss));
    JudgeVerdict v;
    v.aggregate = JudgeVerdict::Aggregate::win;
    verdicts.insert(verdicts.end(), static_cast<std::size_t>(row.win), v);
    v.aggregate = JudgeVerdict::Aggregate::tie;
    verdicts.insert(verdicts.end(), static_cast<std::size_t>(row.tie), v);
    v.aggregate = JudgeVerdict::Aggregate::loss;
    verdicts.insert(verdicts.end(), static_cast<std::size_t>(row.loss), v);
    const WinRate wr = win_rate(verdicts);
    out.push_back({{"model", row.model},
                   {"win", wr.wins},
                   {"tie", wr.ties},
                   {"loss", wr.losses},
                   {"win_rate", format_percent(wr.rate)}});
  }
  return out;
}

std::string render_table1_text(const nlohmann::json& report) {
  std::ostringstream out;
  out << "Correction accuracy under competing diagnostics\n";
  for (const auto& row : report) {
    out << row.at("model").get<std::string>() << "\n";
    auto line = [&](const char* tag, const char* key, const std::string& aver) {
      out << "  " << tag;
      for (const auto& cell : row.at("cells")) {
        out << "  " << cell.at("dataset").get<std::string>() << " "
            << cell.at(key).get<std::string>() << "%";
      }
      out << "  Aver " << aver << "%\n";
    };
    line("ACC_corr | D ", "acc_d", row.at("aver_d").get<std::string>());
    line("ACC_corr | D*", "acc_dstar", row.at("aver_dstar").get<std::string>());
    out << "  uplift " << row.at("uplift").get<std::string>() << "%\n";
  }
  return out.str();
}

std::string render_table2_text(const nlohmann::json& report) {
  std::ostringstream out;
  out << "Judge win rate of D* over D (order-swapped, net preference)\n";
  for (const auto& row : report) {
    out << "  " << row.at("model").get<std::string>() << "  win " << row.at("win").get<long>()
        << "  tie " << row.at("tie").get<long>() << "  loss " << row.at("loss").get<long>()
        << "  rate " << row.at("win_rate").get<std::string>() << "%\n";
  }
  return out.str();
}

}  // namespace hsg
