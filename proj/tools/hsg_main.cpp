#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>
#include <json.hpp>

#include "hsg/corrector.hpp"
#include "hsg/dataset.hpp"
#include "hsg/errors.hpp"
#include "hsg/eval.hpp"
#include "hsg/gradcheck.hpp"
#include "hsg/orchestrator.hpp"
#include "hsg/replay.hpp"
#include "hsg/version.hpp"

namespace {

using hsg::Error;

int cmd_train(const std::string& config_path, std::uint64_t seed_override, bool seed_set,
              const std::string& output_override, int steps_override) {
  hsg::RunConfig cfg = hsg::RunConfig::load(config_path);
  if (seed_set) cfg.seed = seed_override;
  if (!output_override.empty()) cfg.output_dir = output_override;
  if (steps_override >= 0) cfg.steps = steps_override;

  hsg::GameOrchestrator orchestrator(cfg);
  const hsg::RunCheckpoint selected = orchestrator.train();
  std::cout << "run complete: " << cfg.steps << " rounds in " << cfg.output_dir << "\n"
            << "selected checkpoint: step " << selected.step << " (ACC_corr "
            << hsg::format_percent(selected.acc_corr) << "%, snapshot " << selected.snapshot_file
            << ")\n";
  return 0;
}

std::unique_ptr<hsg::Policy> build_judge(const hsg::RunConfig& cfg) {
  const auto& b = cfg.judge_backend;
  if (b.kind == "none") return nullptr;
  if (b.kind == "mock") {
    auto mock = std::make_unique<hsg::MockPolicy>(b.mock_text, b.mock_logprob);
    for (const auto& text : b.mock_queue) mock->enqueue(text);
    return mock;
  }
  if (b.kind == "endpoint") {
    hsg::TemplateSet templates;
    if (!cfg.template_dir.empty()) templates = hsg::TemplateSet::load_dir(cfg.template_dir);
    return std::make_unique<hsg::EndpointPolicy>(b.endpoint, std::move(templates));
  }
  throw hsg::config_error("backend_config", "judge backend must be none, mock or endpoint");
}

int cmd_eval(const std::string& items_path, const std::string& table1_path,
             const std::string& table2_path, const std::string& labels_path,
             const std::string& out_dir, const std::string& config_path) {
  if (items_path.empty() && table1_path.empty() && table2_path.empty() && labels_path.empty()) {
    throw hsg::data_error("empty_fixture",
                          "eval needs at least one of --items/--table1/--table2/--labels");
  }
  std::filesystem::create_directories(out_dir);
  nlohmann::json report;
  std::ostringstream text;
  const hsg::Tokenizer tokenizer;
  const hsg::CanonicalChecker checker;

  if (!items_path.empty()) {
    const auto items = hsg::load_eval_items(items_path);
    hsg::RuleBasedCorrector corrector;
    const auto acc_d = hsg::acc_corr(items, hsg::Diagnostic::d, corrector, checker, tokenizer);
    const auto acc_dstar =
        hsg::acc_corr(items, hsg::Diagnostic::dstar, corrector, checker, tokenizer);
    report["acc_corr"] = nlohmann::json{{"items", items.size()},
                                        {"d", hsg::format_percent(acc_d.acc())},
                                        {"dstar", hsg::format_percent(acc_dstar.acc())},
                                        {"excluded_d", acc_d.excluded},
                                        {"excluded_dstar", acc_dstar.excluded}};
    report["stealthiness"] =
        nlohmann::json{{"d", hsg::format_percent(1.0 - acc_d.acc())},
                       {"dstar", hsg::format_percent(1.0 - acc_dstar.acc())}};
    text << "ACC_corr over " << items.size() << " items: D " << hsg::format_percent(acc_d.acc())
         << "%  D* " << hsg::format_percent(acc_dstar.acc()) << "%\n"
         << "stealthiness (1 - ACC_corr): D " << hsg::format_percent(1.0 - acc_d.acc())
         << "%  D* " << hsg::format_percent(1.0 - acc_dstar.acc()) << "%\n";

    // Win rate: precomputed per-item judge passes when the fixture carries
    // them, otherwise a live judge from --config (fanned out with a cap).
    std::vector<hsg::JudgeVerdict> verdicts;
    for (const auto& item : items) {
      if (!item.judge_pref_first || !item.judge_pref_second) continue;
      auto parse = [](const std::string& s) { return hsg::parse_judge_choice(s); };
      const auto first = parse(*item.judge_pref_first);
      const auto second = parse(*item.judge_pref_second);
      hsg::JudgeVerdict v;
      v.unparseable = !first && !second;
      auto flip = [](hsg::Pref p) {
        if (p == hsg::Pref::a_better) return hsg::Pref::b_better;
        if (p == hsg::Pref::b_better) return hsg::Pref::a_better;
        return hsg::Pref::tie;
      };
      v.first_pass = first.value_or(hsg::Pref::tie);
      v.second_pass = second ? flip(*second) : hsg::Pref::tie;
      v.aggregate = hsg::aggregate_passes(v.first_pass, v.second_pass);
      verdicts.push_back(v);
    }
    if (verdicts.empty() && !config_path.empty()) {
      const hsg::RunConfig cfg = hsg::RunConfig::load(config_path);
      if (auto judge = build_judge(cfg)) {
        verdicts = hsg::judge_items(*judge, items);
      }
    }

    // Error-type taxonomy of the sneaky answers themselves, where the exact
    // step verifier applies (toy-domain questions).
    {
      hsg::ToyStepVerifier verifier;
      std::vector<hsg::ErrorTypeLabel> labels;
      long low_confidence = 0;
      for (const auto& item : items) {
        const auto label =
            hsg::classify_error_type(item.problem, item.a_s_text, checker, &verifier);
        if (label.low_confidence) ++low_confidence;
        labels.push_back(label);
      }
      if (!labels.empty()) {
        const auto dist = hsg::error_type_distribution(labels);
        report["error_types_items"] =
            nlohmann::json{{"a_only", hsg::format_percent(dist.a_only)},
                           {"b_only", hsg::format_percent(dist.b_only)},
                           {"both", hsg::format_percent(dist.both)},
                           {"neither", hsg::format_percent(dist.neither)},
                           {"low_confidence", low_confidence}};
        text << "item error types: A-only " << hsg::format_percent(dist.a_only) << "%  B-only "
             << hsg::format_percent(dist.b_only) << "%  A&B " << hsg::format_percent(dist.both)
             << "%  neither " << hsg::format_percent(dist.neither) << "%\n";
      }
    }
    if (!verdicts.empty()) {
      const auto wr = hsg::win_rate(verdicts);
      report["win_rate"] = nlohmann::json{{"win", wr.wins},
                                          {"tie", wr.ties},
                                          {"loss", wr.losses},
                                          {"rate", hsg::format_percent(wr.rate)}};
      text << "judge win rate (D* over D): " << wr.wins << "W/" << wr.ties << "T/" << wr.losses
           << "L = " << hsg::format_percent(wr.rate) << "%\n";
    }
  }

  if (!table1_path.empty()) {
    const auto rows = hsg::load_table1_counts(table1_path);
    report["table1"] = hsg::table1_report(rows);
    text << hsg::render_table1_text(report["table1"]);
  }
  if (!table2_path.empty()) {
    const auto rows = hsg::load_table2_counts(table2_path);
    report["table2"] = hsg::table2_report(rows);
    text << hsg::render_table2_text(report["table2"]);
  }

  if (!labels_path.empty()) {
    std::ifstream in(labels_path);
    if (!in) throw hsg::data_error("missing_file", "cannot open labels file: " + labels_path);
    std::vector<hsg::ErrorTypeLabel> labels;
    std::string line;
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const auto j = nlohmann::json::parse(line);
      hsg::ErrorTypeLabel label;
      label.has_type_a = j.at("has_type_a").get<bool>();
      label.has_type_b = j.at("has_type_b").get<bool>();
      labels.push_back(label);
    }
    const auto dist = hsg::error_type_distribution(labels);
    report["error_types"] = nlohmann::json{{"a_only", hsg::format_percent(dist.a_only)},
                                           {"b_only", hsg::format_percent(dist.b_only)},
                                           {"both", hsg::format_percent(dist.both)},
                                           {"neither", hsg::format_percent(dist.neither)}};
    text << "error types: A-only " << hsg::format_percent(dist.a_only) << "%  B-only "
         << hsg::format_percent(dist.b_only) << "%  A&B " << hsg::format_percent(dist.both)
         << "%  neither " << hsg::format_percent(dist.neither) << "%\n";
  }

  {
    std::ofstream json_out(std::filesystem::path(out_dir) / "report.json");
    json_out << report.dump(2) << "\n";
    std::ofstream text_out(std::filesystem::path(out_dir) / "report.txt");
    text_out << text.str();
  }
  std::cout << text.str();
  std::cout << "reports written to " << out_dir << "\n";
  return 0;
}

int cmd_gradcheck(std::uint64_t seed, int trials, bool self_check) {
  const auto report = hsg::run_gradcheck(seed, trials);
  std::cout << "gradcheck: " << report.configurations << " configurations, "
            << report.failures << " failures, worst relative error " << report.worst_error
            << "\n";
  std::cout << (report.zero_gradient_case_ok
                    ? "zero-advantage stationary batch: zero gradient (as expected)\n"
                    : "zero-advantage stationary batch: NONZERO gradient\n");
  for (const auto& note : report.failure_notes) std::cout << "  " << note << "\n";
  bool ok = report.passed();

  if (self_check) {
    const auto mutated = hsg::run_gradcheck(seed, std::min(trials, 20), 1e-6,
                                            /*flip_surrogate_sign=*/true);
    const bool caught = mutated.failures > 0;
    std::cout << "self-check (sign-flipped surrogate): "
              << (caught ? "rejected by the oracle (good)" : "NOT rejected (oracle is blind!)")
              << "\n";
    ok = ok && caught;
  }
  if (!ok) throw hsg::assertion_error("gradcheck_failed", "gradient check failed");
  std::cout << "gradcheck passed\n";
  return 0;
}

int cmd_ingest_check(const std::string& path, const std::string& source) {
  const auto report = hsg::ingest(path, hsg::dataset_source_from_string(source));
  std::cout << "valid records: " << report.records.size() << "\n"
            << "skipped lines: " << report.skipped << "\n";
  for (const auto& issue : report.issues) std::cout << "  " << issue << "\n";
  return 0;
}

int cmd_replay(const std::string& run_dir, bool skip_evals) {
  const auto result = hsg::replay_audit(run_dir, !skip_evals);
  std::cout << "replayed " << result.rounds_checked << " rounds / " << result.entries_checked
            << " tuples";
  if (result.evals_checked > 0) std::cout << ", recomputed " << result.evals_checked << " evals";
  std::cout << "\n";
  for (const auto& issue : result.issues) std::cout << "  MISMATCH: " << issue << "\n";
  if (!result.ok()) {
    throw hsg::assertion_error("replay_mismatch",
                               std::to_string(result.issues.size()) + " replay mismatches");
  }
  std::cout << "transcript replay is exact; checkpoint selection verified\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hide-and-seek adversarial error-generation/diagnosis trainer"};
  app.set_version_flag("--version", hsg::kToolVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::string output_override;
  std::uint64_t seed_override = 0;
  bool seed_set = false;
  int steps_override = -1;

  auto* train = app.add_subcommand("train", "run the alternating S/D training loop");
  train->add_option("--config", config_path, "run config JSON")->required();
  train->add_option("--seed", seed_override, "override the config seed")
      ->each([&seed_set](const std::string&) { seed_set = true; });
  train->add_option("--output", output_override, "override the output directory");
  train->add_option("--steps", steps_override, "override the round count");

  std::string items_path, table1_path, table2_path, labels_path, eval_config;
  std::string eval_out = "eval_out";
  auto* eval = app.add_subcommand("eval", "compute metrics from fixtures");
  eval->add_option("--items", items_path, "EvalItem JSON Lines file");
  eval->add_option("--table1", table1_path, "correction-accuracy count fixture (JSON)");
  eval->add_option("--table2", table2_path, "win/tie/loss count fixture (JSON)");
  eval->add_option("--labels", labels_path, "error-type labels (JSON Lines)");
  eval->add_option("--config", eval_config, "run config supplying a judge backend");
  eval->add_option("--out", eval_out, "report output directory");

  std::uint64_t gc_seed = 20240817;
  int gc_trials = 120;
  bool gc_self_check = false;
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient audit");
  gradcheck->add_option("--seed", gc_seed, "random seed");
  gradcheck->add_option("--trials", gc_trials, "number of random configurations");
  gradcheck->add_flag("--self-check", gc_self_check,
                      "also verify the oracle rejects a mutated gradient");

  std::string ingest_path, ingest_source = "toy";
  auto* ingest = app.add_subcommand("ingest-check", "validate a JSON Lines dataset");
  ingest->add_option("--path", ingest_path, "dataset file")->required();
  ingest->add_option("--source", ingest_source, "gsm8k-style|math-style|numina-style|toy");

  std::string replay_dir;
  bool replay_skip_evals = false;
  auto* replay = app.add_subcommand("replay", "recompute rewards from a transcript and diff");
  replay->add_option("--run", replay_dir, "run directory")->required();
  replay->add_flag("--skip-evals", replay_skip_evals, "skip checkpoint eval recomputation");

  try {
    app.parse(argc, argv);
    if (train->parsed()) {
      return cmd_train(config_path, seed_override, seed_set, output_override, steps_override);
    }
    if (eval->parsed()) {
      return cmd_eval(items_path, table1_path, table2_path, labels_path, eval_out, eval_config);
    }
    if (gradcheck->parsed()) return cmd_gradcheck(gc_seed, gc_trials, gc_self_check);
    if (ingest->parsed()) return cmd_ingest_check(ingest_path, ingest_source);
    if (replay->parsed()) return cmd_replay(replay_dir, replay_skip_evals);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << "error [" << e.code() << "]: " << e.what() << "\n";
    return hsg::exit_code_for(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
