#include "hsg/replay.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "hsg/corrector.hpp"
#include "hsg/errors.hpp"
#include "hsg/orchestrator.hpp"
#include "hsg/rng.hpp"
#include "hsg/transcript.hpp"

namespace hsg {

namespace {

struct HeaderState {
  RewardConfig reward;
  GrpoConfig grpo;
  ToyBackendConfig toy;
  DatasetConfig dataset;
  FormatSpec sneaky_format;
  FormatSpec diagnosis_format;
  Tokenizer tokenizer{"ws-v1"};
  std::uint64_t seed = 0;
};

HeaderState parse_header(const nlohmann::json& header) {
  HeaderState h;
  h.reward = RewardConfig::from_json(header.at("reward"));
  h.grpo = GrpoConfig::from_json(header.at("grpo"));
  h.toy = ToyBackendConfig::from_json(header.at("toy"));
  h.dataset = DatasetConfig::from_json(header.at("dataset"));
  h.sneaky_format = FormatSpec::from_json(header.at("sneaky_format"));
  h.diagnosis_format = FormatSpec::from_json(header.at("diagnosis_format"));
  h.tokenizer = Tokenizer(header.at("tokenizer").get<std::string>());
  h.seed = header.at("seed").get<std::uint64_t>();
  return h;
}

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

ReplayResult replay_audit(const std::filesystem::path& run_dir, bool recompute_evals) {
  ReplayResult result;
  auto issue = [&result](const std::string& text) { result.issues.push_back(text); };

  const auto contents = read_transcript(run_dir / "transcript.jsonl");
  const HeaderState h = parse_header(contents.header);
  CanonicalChecker checker;

  for (const auto& round : contents.rounds) {
    ++result.rounds_checked;
    const std::string where = "round " + std::to_string(round.round_index);
    const bool is_s_round = round.role_updated == 'S';

    const Answer reference = make_answer(round.reference_text, Role::reference, h.tokenizer);
    std::vector<double> rewards;
    for (std::size_t i = 0; i < round.group.size(); ++i) {
      ++result.entries_checked;
      const auto& entry = round.group[i];
      const std::string at = where + " entry " + std::to_string(i);

      // The persisted texts alone must reproduce the bundle exactly.
      const Answer a_s = make_answer(entry.a_s.text, Role::sneaky, h.tokenizer);
      const DiagnosticReport a_d = make_report(entry.a_d.text, h.tokenizer);
      const Answer a_c = make_answer(entry.a_c.text, Role::correction, h.tokenizer);
      if (a_s.length != entry.a_s.length || a_d.length != entry.a_d.length ||
          a_c.length != entry.a_c.length) {
        issue(at + ": stored token counts disagree with the tokenizer");
      }
      if (a_d.verdict != entry.a_d.verdict) {
        issue(at + ": stored verdict disagrees with the verdict grammar");
      }
      const RewardBundle recomputed = compute_bundle(a_s, a_d, a_c, reference, h.reward, checker,
                                                     h.sneaky_format, h.diagnosis_format);
      if (!(recomputed == entry.rewards)) {
        issue(at + ": recomputed reward bundle differs");
      }
      rewards.push_back(is_s_round ? recomputed.r_s_adv : recomputed.r_d_collab);
    }

    const auto advantages = group_advantage(rewards, h.grpo.delta);
    for (std::size_t i = 0; i < round.group.size(); ++i) {
      if (advantages[i] != round.group[i].advantage) {
        issue(where + ": advantage " + std::to_string(i) + " differs (" + fmt(advantages[i]) +
              " vs " + fmt(round.group[i].advantage) + ")");
      }
    }
    if (argmax_reward(rewards) != round.hardest_index) {
      issue(where + ": hardest_index is not the reward argmax");
    }

    GroupBatch batch;
    batch.rewards = rewards;
    batch.advantages = advantages;
    batch.hardest_index = round.hardest_index;
    for (const auto& entry : round.group) {
      batch.logprob_old.push_back(entry.logprob_old);
      batch.logprob_new.push_back(entry.logprob_new);
      batch.logprob_ref.push_back(entry.logprob_ref);
    }
    const double beta_kl = is_s_round ? h.grpo.beta_kl_s : h.grpo.beta_kl_d;
    const double objective = grpo_objective(batch, h.grpo, beta_kl, round.kl);
    if (objective != round.objective) {
      issue(where + ": objective differs (" + fmt(objective) + " vs " + fmt(round.objective) + ")");
    }

    if (!is_s_round) {
      if (!round.a_s_star_text || round.paired_s_round < 0 ||
          round.paired_s_round >= round.round_index) {
        issue(where + ": D round lacks a valid paired S round");
      } else {
        const auto& paired = contents.rounds.at(static_cast<std::size_t>(round.paired_s_round));
        const auto& star = paired.group.at(static_cast<std::size_t>(paired.hardest_index));
        if (star.a_s.text != *round.a_s_star_text) {
          issue(where + ": a_S* is not the paired round's hardest sample");
        }
        double max_reward = paired.group.front().rewards.r_s_adv;
        for (const auto& e : paired.group) max_reward = std::max(max_reward, e.rewards.r_s_adv);
        if (star.rewards.r_s_adv != max_reward) {
          issue(where + ": paired hardest sample does not carry the maximal reward");
        }
      }
    }
  }

  // Manifest: the selected checkpoint must carry the minimal ACC_corr.
  const auto manifest_path = run_dir / "checkpoints" / "manifest.json";
  std::ifstream manifest_in(manifest_path);
  if (!manifest_in) {
    issue("missing checkpoint manifest: " + manifest_path.string());
    return result;
  }
  nlohmann::json manifest;
  manifest_in >> manifest;
  const int selected_step = manifest.at("selected_step").get<int>();
  int selected_count = 0;
  double min_acc = std::numeric_limits<double>::infinity();
  double selected_acc = std::numeric_limits<double>::infinity();
  for (const auto& e : manifest.at("evals")) {
    const double acc = e.at("acc_corr").get<double>();
    min_acc = std::min(min_acc, acc);
    if (e.at("selected").get<bool>()) {
      ++selected_count;
      selected_acc = acc;
      if (e.at("step").get<int>() != selected_step) {
        issue("manifest: selected flag disagrees with selected_step");
      }
    }
    const double stealth = e.at("stealthiness").get<double>();
    if (stealth != 1.0 - acc) issue("manifest: stealthiness is not 1 - acc_corr");
  }
  if (selected_count != 1) {
    issue("manifest: expected exactly one selected checkpoint, found " +
          std::to_string(selected_count));
  } else if (selected_acc > min_acc) {
    issue("manifest: selected checkpoint is not the ACC_corr minimum");
  }

  if (recompute_evals && h.dataset.use_generator) {
    const std::uint64_t gen_seed = h.dataset.generator_seed != 0
                                       ? h.dataset.generator_seed
                                       : stream_key(h.seed, "dataset");
    const auto records = generate_toy_records(gen_seed, h.dataset.train_count,
                                              h.dataset.heldout_count, h.toy.distractors);
    std::vector<Problem> heldout;
    for (const auto& r : records) {
      if (r.split != "train") heldout.push_back(problem_from_record(r, h.tokenizer));
    }
    RuleBasedCorrector corrector;
    for (const auto& e : manifest.at("evals")) {
      const int step = e.at("step").get<int>();
      const auto snapshot_path =
          run_dir / "checkpoints" / e.at("snapshot").get<std::string>();
      std::ifstream snap_in(snapshot_path);
      if (!snap_in) {
        issue("missing checkpoint snapshot: " + snapshot_path.string());
        continue;
      }
      nlohmann::json snapshot;
      snap_in >> snapshot;
      if (snapshot.at("policy").is_null()) continue;  // non-trainable backends
      ToySoftmaxPolicy policy(h.toy.temperature, h.toy.distractors);
      policy.restore(snapshot.at("policy"));
      const double acc = heldout_acc_corr(policy, policy, corrector, heldout, h.tokenizer,
                                          checker, h.seed, step);
      ++result.evals_checked;
      if (acc != e.at("acc_corr").get<double>()) {
        issue("checkpoint step " + std::to_string(step) + ": recomputed ACC_corr " + fmt(acc) +
              " differs from recorded " + fmt(e.at("acc_corr").get<double>()));
      }
    }
  }
  return result;
}

}  // namespace hsg
