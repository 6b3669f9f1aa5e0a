#include "hsg/orchestrator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "hsg/corrector.hpp"
#include "hsg/errors.hpp"
#include "hsg/rng.hpp"
#include "hsg/version.hpp"

namespace hsg {

namespace {

constexpr const char* kTranscriptFile = "transcript.jsonl";
constexpr const char* kStateFile = "state.json";
constexpr const char* kConfigFile = "config.json";
constexpr const char* kCheckpointDir = "checkpoints";

std::shared_ptr<Policy> build_backend(const BackendConfig& b, const RunConfig& cfg) {
  if (b.kind == "mock") {
    auto mock = std::make_shared<MockPolicy>(b.mock_text, b.mock_logprob);
    for (const auto& text : b.mock_queue) mock->enqueue(text);
    return mock;
  }
  if (b.kind == "rule") return std::make_shared<RuleBasedCorrector>();
  if (b.kind == "endpoint") {
    TemplateSet templates;
    if (!cfg.template_dir.empty()) templates = TemplateSet::load_dir(cfg.template_dir);
    return std::make_shared<EndpointPolicy>(b.endpoint, std::move(templates));
  }
  throw config_error("backend_config", "cannot build backend of kind: " + b.kind);
}

nlohmann::json dataset_fingerprint(const std::vector<Problem>& train,
                                   const std::vector<Problem>& heldout) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto fold = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& p : train) fold(p.id);
  for (const auto& p : heldout) fold(p.id);
  std::ostringstream hex;
  hex << std::hex << h;
  return {{"train", train.size()}, {"heldout", heldout.size()}, {"hash", hex.str()}};
}

}  // namespace

Problem problem_from_record(const DatasetRecord& record, const Tokenizer& tokenizer) {
  Problem p;
  p.id = record.id;
  p.question = record.question;
  p.reference = make_answer(record.reference_answer, Role::reference, tokenizer);
  if (!p.reference.final_value) {
    throw data_error("reference_unextractable",
                     "record " + record.id + " has no extractable reference value");
  }
  p.policy_key = record.id;
  if (record.source == DatasetSource::toy) {
    if (auto toy = parse_toy_question(record.id, record.question)) {
      p.policy_key = toy->archetype;
    }
  }
  return p;
}

double heldout_acc_corr(Policy& sneaky, Policy& diagnosis, Policy& corrector,
                        const std::vector<Problem>& heldout, const Tokenizer& tokenizer,
                        const AnswerChecker& checker, std::uint64_t seed, int step) {
  if (heldout.empty()) throw data_error("empty_heldout", "held-out slice is empty");
  long successes = 0;
  for (std::size_t i = 0; i < heldout.size(); ++i) {
    const Problem& p = heldout[i];
    RoleContext s_ctx{Actor::sneaky, "sneaky", {{"q", p.question}, {"policy_key", p.policy_key}}};
    auto a_s_gen = sneaky.sample(s_ctx, 1, stream_key(seed, "eval-s", step, i));
    Answer a_s = make_answer(std::move(a_s_gen.front().text), Role::sneaky, tokenizer);

    RoleContext d_ctx{Actor::diagnosis,
                      "diagnosis",
                      {{"a_truth", p.reference.text},
                       {"a_s", a_s.text},
                       {"policy_key", p.policy_key}}};
    auto a_d_gen = diagnosis.sample(d_ctx, 1, stream_key(seed, "eval-d", step, i));
    DiagnosticReport a_d = make_report(std::move(a_d_gen.front().text), tokenizer);

    Answer a_c = correct_answer(corrector, a_s, a_d, tokenizer, stream_key(seed, "eval-c", step, i));
    if (a_c.final_value && checker.equivalent(*a_c.final_value, *p.reference.final_value)) {
      ++successes;
    }
  }
  return static_cast<double>(successes) / static_cast<double>(heldout.size());
}

GameOrchestrator::GameOrchestrator(RunConfig config)
    : cfg_(std::move(config)), tokenizer_(cfg_.tokenizer), run_dir_(cfg_.output_dir) {
  cfg_.validate();

  std::vector<DatasetRecord> records;
  if (cfg_.dataset.use_generator) {
    const std::uint64_t gen_seed =
        cfg_.dataset.generator_seed != 0 ? cfg_.dataset.generator_seed
                                         : stream_key(cfg_.seed, "dataset");
    records = generate_toy_records(gen_seed, cfg_.dataset.train_count,
                                   cfg_.dataset.heldout_count, cfg_.toy.distractors);
  } else {
    for (const auto& entry : cfg_.dataset.paths) {
      auto report = ingest(entry.path, entry.source);
      // Integer weights replicate a source's records in the training mix;
      // held-out records are never duplicated.
      const int copies = std::max(1, static_cast<int>(std::lround(entry.weight)));
      for (const auto& r : report.records) {
        const int n = r.split == "train" ? copies : 1;
        for (int c = 0; c < n; ++c) records.push_back(r);
      }
    }
  }
  for (const auto& record : records) {
    Problem p = problem_from_record(record, tokenizer_);
    (record.split == "train" ? train_ : heldout_).push_back(std::move(p));
  }
  if (train_.empty()) throw data_error("empty_dataset", "no training problems after ingestion");

  if (cfg_.sneaky_backend.kind == "toy") {
    toy_ = std::make_shared<ToySoftmaxPolicy>(cfg_.toy.temperature, cfg_.toy.distractors);
    sneaky_ = toy_;
    diagnosis_ = toy_;  // parameter-shared model, role-disjoint keys
  } else {
    sneaky_ = build_backend(cfg_.sneaky_backend, cfg_);
    diagnosis_ = build_backend(cfg_.diagnosis_backend, cfg_);
  }
  corrector_ = build_backend(cfg_.corrector_backend, cfg_);
}

nlohmann::json GameOrchestrator::transcript_header() const {
  // Deliberately excludes steps and wall-clock data: a resumed or extended run
  // must prefix-match a fresh run byte-for-byte.
  return {{"kind", "hsg-transcript"},
          {"schema_version", kTranscriptSchemaVersion},
          {"tool_version", kToolVersion},
          {"seed", cfg_.seed},
          {"tokenizer", tokenizer_.id()},
          {"reward", cfg_.reward.to_json()},
          {"grpo", cfg_.grpo.to_json()},
          {"toy", cfg_.toy.to_json()},
          {"dataset", cfg_.dataset.to_json()},
          {"sneaky_format", cfg_.sneaky_format.to_json()},
          {"diagnosis_format", cfg_.diagnosis_format.to_json()},
          {"dataset_fingerprint", dataset_fingerprint(train_, heldout_)}};
}

const Problem& GameOrchestrator::problem_for_round(int round_index) const {
  // Paired rounds: round 2k is an S round on problem P, round 2k+1 the D round
  // on the same problem. Problem order reshuffles once per pass.
  const int pair_index = round_index / 2;
  const std::size_t epoch = static_cast<std::size_t>(pair_index) / train_.size();
  const std::size_t position = static_cast<std::size_t>(pair_index) % train_.size();
  std::vector<std::size_t> order(train_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto rng = make_stream(cfg_.seed, "shuffle", epoch);
  std::shuffle(order.begin(), order.end(), rng);
  return train_[order[position]];
}

GameOrchestrator::RoundOutcome GameOrchestrator::play_round_once(const Problem& problem,
                                                                 int round_index,
                                                                 const RoundRecord* s_round,
                                                                 std::uint64_t attempt) {
  const bool is_s_round = s_round == nullptr;
  const int g = cfg_.grpo.group_size;

  RoundOutcome out;
  RoundRecord& record = out.record;
  record.round_index = round_index;
  record.role_updated = is_s_round ? 'S' : 'D';
  record.problem_id = problem.id;
  record.reference_text = problem.reference.text;

  std::vector<Answer> sneaky_answers;
  std::vector<double> sneaky_logprobs;
  Answer a_star;

  if (is_s_round) {
    RoleContext s_ctx{Actor::sneaky, "sneaky",
                      {{"q", problem.question}, {"policy_key", problem.policy_key}}};
    auto generations =
        sneaky_->sample(s_ctx, g, stream_key(cfg_.seed, "s-sample", round_index, attempt));
    for (auto& gen : generations) {
      sneaky_answers.push_back(make_answer(std::move(gen.text), Role::sneaky, tokenizer_));
      sneaky_logprobs.push_back(gen.logprob.value_or(0.0));
    }
    out.update_ctx = s_ctx;
  } else {
    const int star = s_round->hardest_index;
    a_star = s_round->group.at(static_cast<std::size_t>(star)).a_s;
    record.a_s_star_text = a_star.text;
    record.paired_s_round = s_round->round_index;
    out.update_ctx = RoleContext{Actor::diagnosis,
                                 "diagnosis",
                                 {{"a_truth", problem.reference.text},
                                  {"a_s", a_star.text},
                                  {"policy_key", problem.policy_key}}};
  }

  std::vector<DiagnosticReport> reports;
  std::vector<double> diag_logprobs;
  if (is_s_round) {
    for (int i = 0; i < g; ++i) {
      RoleContext d_ctx{Actor::diagnosis,
                        "diagnosis",
                        {{"a_truth", problem.reference.text},
                         {"a_s", sneaky_answers[static_cast<std::size_t>(i)].text},
                         {"policy_key", problem.policy_key}}};
      auto gen = diagnosis_->sample(d_ctx, 1, stream_key(cfg_.seed, "s-diag", round_index, i, attempt));
      reports.push_back(make_report(std::move(gen.front().text), tokenizer_));
      diag_logprobs.push_back(gen.front().logprob.value_or(0.0));
    }
  } else {
    auto generations = diagnosis_->sample(out.update_ctx, g,
                                          stream_key(cfg_.seed, "d-sample", round_index, attempt));
    for (auto& gen : generations) {
      reports.push_back(make_report(std::move(gen.text), tokenizer_));
      diag_logprobs.push_back(gen.logprob.value_or(0.0));
    }
  }

  std::vector<double> round_rewards(static_cast<std::size_t>(g));
  record.group.resize(static_cast<std::size_t>(g));
  for (int i = 0; i < g; ++i) {
    auto& entry = record.group[static_cast<std::size_t>(i)];
    entry.a_s = is_s_round ? sneaky_answers[static_cast<std::size_t>(i)] : a_star;
    entry.a_d = reports[static_cast<std::size_t>(i)];
    entry.a_c = correct_answer(*corrector_, entry.a_s, entry.a_d, tokenizer_,
                               stream_key(cfg_.seed, "correct", round_index, i, attempt));
    entry.rewards = compute_bundle(entry.a_s, entry.a_d, entry.a_c, problem.reference, cfg_.reward,
                                   checker_, cfg_.sneaky_format, cfg_.diagnosis_format);
    entry.logprob_old =
        is_s_round ? sneaky_logprobs[static_cast<std::size_t>(i)] : diag_logprobs[static_cast<std::size_t>(i)];
    round_rewards[static_cast<std::size_t>(i)] =
        is_s_round ? entry.rewards.r_s_adv : entry.rewards.r_d_collab;
  }

  const auto advantages = group_advantage(round_rewards, cfg_.grpo.delta);
  record.hardest_index = argmax_reward(round_rewards);

  out.batch.rewards = round_rewards;
  out.batch.advantages = advantages;
  out.batch.logprob_old.resize(static_cast<std::size_t>(g));
  out.batch.logprob_ref.resize(static_cast<std::size_t>(g));
  out.batch.logprob_new.resize(static_cast<std::size_t>(g));
  out.batch.hardest_index = record.hardest_index;

  for (int i = 0; i < g; ++i) {
    auto& entry = record.group[static_cast<std::size_t>(i)];
    entry.advantage = advantages[static_cast<std::size_t>(i)];
    out.batch.logprob_old[static_cast<std::size_t>(i)] = entry.logprob_old;
  }

  if (toy_) {
    out.batch.sample_ids.resize(static_cast<std::size_t>(g));
    const double ref_logprob =
        std::log(1.0 / static_cast<double>(toy_->support(out.update_ctx).size()));
    for (int i = 0; i < g; ++i) {
      auto& entry = record.group[static_cast<std::size_t>(i)];
      const std::string& sampled_text = is_s_round ? entry.a_s.text : entry.a_d.text;
      const int idx = toy_->support_index(out.update_ctx, sampled_text);
      if (idx < 0) throw assertion_error("support_lookup", "sampled text left the toy support");
      out.batch.sample_ids[static_cast<std::size_t>(i)] = idx;
      entry.sample_id = idx;
      entry.logprob_ref = ref_logprob;
      out.batch.logprob_ref[static_cast<std::size_t>(i)] = ref_logprob;
    }
  } else {
    // Non-trainable backends: the reference equals the sampling policy.
    for (int i = 0; i < g; ++i) {
      record.group[static_cast<std::size_t>(i)].logprob_ref = record.group[static_cast<std::size_t>(i)].logprob_old;
      out.batch.logprob_ref[static_cast<std::size_t>(i)] = out.batch.logprob_old[static_cast<std::size_t>(i)];
    }
  }
  return out;
}

void GameOrchestrator::apply_update(RoundOutcome& out, int round_index) {
  const bool is_s_round = out.record.role_updated == 'S';
  const double beta_kl = is_s_round ? cfg_.grpo.beta_kl_s : cfg_.grpo.beta_kl_d;
  const int g = cfg_.grpo.group_size;
  (void)round_index;

  double kl_after = 0.0;
  if (toy_) {
    const auto grad = toy_policy_gradient(*toy_, out.update_ctx, out.batch, cfg_.grpo, beta_kl);
    auto& logits = toy_->mutable_logits(out.update_ctx.role,
                                        out.update_ctx.input("policy_key"), grad.size());
    for (std::size_t j = 0; j < grad.size(); ++j) {
      logits[j] += cfg_.toy.learning_rate * grad[j];
    }
    const auto probs_after = toy_->probabilities(out.update_ctx);
    kl_after = kl_from_probs(probs_after, toy_->reference_probs(probs_after.size()));
    for (int i = 0; i < g; ++i) {
      auto& entry = out.record.group[static_cast<std::size_t>(i)];
      const std::string& sampled_text = is_s_round ? entry.a_s.text : entry.a_d.text;
      entry.logprob_new = toy_->logprob(out.update_ctx, sampled_text);
      out.batch.logprob_new[static_cast<std::size_t>(i)] = entry.logprob_new;
    }
  } else {
    for (int i = 0; i < g; ++i) {
      auto& entry = out.record.group[static_cast<std::size_t>(i)];
      entry.logprob_new = entry.logprob_old;
      out.batch.logprob_new[static_cast<std::size_t>(i)] = entry.logprob_new;
    }
    kl_after = kl_estimate(out.batch);
  }

  out.record.kl = kl_after;
  out.record.objective = grpo_objective(out.batch, cfg_.grpo, beta_kl, kl_after);
}

RoundRecord GameOrchestrator::run_s_round(const Problem& problem, int round_index) {
  RoundOutcome out = [&] {
    try {
      return play_round_once(problem, round_index, nullptr, 0);
    } catch (const Error& e) {
      if (e.category() != ErrorCategory::backend) throw;
      // One retry with fresh samples; a second failure aborts the round.
      return play_round_once(problem, round_index, nullptr, 1);
    }
  }();
  apply_update(out, round_index);
  return out.record;
}

RoundRecord GameOrchestrator::run_d_round(const Problem& problem, int round_index,
                                          const RoundRecord& s_round) {
  if (s_round.group.empty()) {
    throw assertion_error("missing_group", "D round requires the paired sneaky group");
  }
  RoundOutcome out = [&] {
    try {
      return play_round_once(problem, round_index, &s_round, 0);
    } catch (const Error& e) {
      if (e.category() != ErrorCategory::backend) throw;
      return play_round_once(problem, round_index, &s_round, 1);
    }
  }();
  apply_update(out, round_index);
  return out.record;
}

double GameOrchestrator::evaluate(int step) const {
  return heldout_acc_corr(*sneaky_, *diagnosis_, *corrector_, heldout_, tokenizer_, checker_,
                          cfg_.seed, step);
}

void GameOrchestrator::persist_state(int next_round, const std::vector<EvalPoint>& evals) const {
  nlohmann::json evals_json = nlohmann::json::array();
  for (const auto& e : evals) {
    evals_json.push_back({{"step", e.step},
                          {"acc_corr", e.acc_corr},
                          {"stealthiness", e.stealthiness},
                          {"snapshot", e.snapshot_file}});
  }
  nlohmann::json state{{"schema_version", kSnapshotSchemaVersion},
                       {"next_round", next_round},
                       {"policy", toy_ ? toy_->snapshot() : nlohmann::json(nullptr)},
                       {"evals", evals_json}};
  const auto tmp = run_dir_ / (std::string(kStateFile) + ".tmp");
  {
    std::ofstream out(tmp);
    out << state.dump();
  }
  std::filesystem::rename(tmp, run_dir_ / kStateFile);
}

std::string GameOrchestrator::snapshot_checkpoint(int step, double acc) const {
  std::filesystem::create_directories(run_dir_ / kCheckpointDir);
  std::ostringstream name;
  name << "step_" << step << ".json";
  nlohmann::json snapshot{{"schema_version", kSnapshotSchemaVersion},
                          {"step", step},
                          {"acc_corr", acc},
                          {"policy", toy_ ? toy_->snapshot() : nlohmann::json(nullptr)}};
  std::ofstream out(run_dir_ / kCheckpointDir / name.str());
  out << snapshot.dump() << "\n";
  return name.str();
}

void GameOrchestrator::write_manifest(const std::vector<EvalPoint>& evals,
                                      int selected_step) const {
  nlohmann::json evals_json = nlohmann::json::array();
  for (const auto& e : evals) {
    evals_json.push_back({{"step", e.step},
                          {"acc_corr", e.acc_corr},
                          {"stealthiness", e.stealthiness},
                          {"snapshot", e.snapshot_file},
                          {"selected", e.step == selected_step}});
  }
  nlohmann::json manifest{{"schema_version", kSnapshotSchemaVersion},
                          {"tool_version", kToolVersion},
                          {"selected_step", selected_step},
                          {"evals", evals_json}};
  std::ofstream out(run_dir_ / kCheckpointDir / "manifest.json");
  out << manifest.dump(2) << "\n";
}

RunCheckpoint GameOrchestrator::train() {
  std::filesystem::create_directories(run_dir_);
  const auto state_path = run_dir_ / kStateFile;
  const auto transcript_path = run_dir_ / kTranscriptFile;

  int next_round = 0;
  std::vector<EvalPoint> evals;
  std::vector<RoundRecord> prior_rounds;

  const bool resuming = std::filesystem::exists(state_path);
  if (resuming) {
    // Refuse to extend a run under a drifted configuration: every round in
    // the transcript must be reproducible from one header.
    if (std::filesystem::exists(transcript_path)) {
      const auto stored = read_transcript(transcript_path).header;
      if (stored != transcript_header()) {
        throw config_error("config_mismatch",
                           "run directory was produced under a different config/seed; "
                           "use a fresh output directory");
      }
    }
    std::ifstream in(state_path);
    nlohmann::json state;
    in >> state;
    next_round = state.at("next_round").get<int>();
    if (toy_ && !state.at("policy").is_null()) toy_->restore(state.at("policy"));
    for (const auto& e : state.at("evals")) {
      EvalPoint point;
      point.step = e.at("step").get<int>();
      point.acc_corr = e.at("acc_corr").get<double>();
      point.stealthiness = e.at("stealthiness").get<double>();
      point.snapshot_file = e.at("snapshot").get<std::string>();
      evals.push_back(std::move(point));
    }
    // A crash can leave one more round in the transcript than the state
    // covers; drop it so the replayed round lands on the same line.
    truncate_transcript(transcript_path, static_cast<std::size_t>(next_round));
    prior_rounds = read_transcript(transcript_path).rounds;
  }

  {
    std::ofstream out(run_dir_ / kConfigFile);
    out << cfg_.to_json().dump(2) << "\n";
  }
  TranscriptWriter writer(transcript_path, transcript_header());

  auto run_eval = [&](int step) {
    const double acc = evaluate(step);
    EvalPoint point;
    point.step = step;
    point.acc_corr = acc;
    point.stealthiness = 1.0 - acc;
    point.snapshot_file = snapshot_checkpoint(step, acc);
    evals.push_back(point);
  };

  if (!resuming) {
    run_eval(0);
    persist_state(0, evals);
  }

  RoundRecord last_s_round;
  bool have_s_round = false;
  if (next_round % 2 == 1) {
    last_s_round = prior_rounds.at(static_cast<std::size_t>(next_round) - 1);
    have_s_round = true;
  }

  for (int round = next_round; round < cfg_.steps; ++round) {
    const Problem& problem = problem_for_round(round);
    RoundRecord record;
    if (round % 2 == 0) {
      record = run_s_round(problem, round);
      last_s_round = record;
      have_s_round = true;
    } else {
      if (!have_s_round) throw assertion_error("missing_group", "D round without paired S round");
      record = run_d_round(problem, round, last_s_round);
    }
    writer.append(record);
    if ((round + 1) % cfg_.eval_interval == 0) run_eval(round + 1);
    persist_state(round + 1, evals);
  }

  if (evals.empty() || evals.back().step != cfg_.steps) {
    run_eval(cfg_.steps);
    persist_state(cfg_.steps, evals);
  }

  // "Most deceptive" selection: minimal held-out correction accuracy,
  // earliest step on ties.
  std::size_t best = 0;
  for (std::size_t i = 1; i < evals.size(); ++i) {
    if (evals[i].acc_corr < evals[best].acc_corr) best = i;
  }
  for (auto& e : evals) e.selected = false;
  evals[best].selected = true;
  write_manifest(evals, evals[best].step);

  RunCheckpoint selected;
  selected.step = evals[best].step;
  selected.snapshot_file = evals[best].snapshot_file;
  selected.acc_corr = evals[best].acc_corr;
  selected.is_selected = true;
  return selected;
}

}  // namespace hsg
