#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "hsg/checker.hpp"
#include "hsg/dataset.hpp"
#include "hsg/policy.hpp"
#include "hsg/run_config.hpp"
#include "hsg/toy_policy.hpp"
#include "hsg/transcript.hpp"

namespace hsg {

/// Runtime view of one dataset record.
struct Problem {
  std::string id;
  std::string question;
  Answer reference;        // role == reference, boxed value extracted
  std::string policy_key;  // toy archetype for toy problems, else the id
};

struct EvalPoint {
  int step = 0;  // number of completed rounds at evaluation time
  double acc_corr = 0.0;
  double stealthiness = 0.0;  // 1 - acc_corr
  std::string snapshot_file;
  bool selected = false;
};

struct RunCheckpoint {
  int step = 0;
  std::string snapshot_file;
  double acc_corr = 0.0;
  bool is_selected = false;
};

/// Held-out correction success rate under the current policies: one sneaky
/// sample, one diagnosis, one correction per problem, streams derived from
/// (seed, step, item). Shared with the replay audit.
double heldout_acc_corr(Policy& sneaky, Policy& diagnosis, Policy& corrector,
                        const std::vector<Problem>& heldout, const Tokenizer& tokenizer,
                        const AnswerChecker& checker, std::uint64_t seed, int step);

Problem problem_from_record(const DatasetRecord& record, const Tokenizer& tokenizer);

/// Runs the alternating Hide/Seek loop: even rounds sample a sneaky group,
/// score it with adversarial feedback and update S; odd rounds attack the
/// paired group's hardest sample with G diagnoses, score them with
/// collaborative feedback and update D. Rounds append to the transcript, the
/// policy state is snapshotted every round (crash-resumable), and held-out
/// evaluation runs every eval_interval rounds. The returned checkpoint is the
/// one with minimal held-out correction accuracy.
class GameOrchestrator {
 public:
  explicit GameOrchestrator(RunConfig config);

  RunCheckpoint train();

  // Exposed for tests and the replay audit.
  RoundRecord run_s_round(const Problem& problem, int round_index);
  RoundRecord run_d_round(const Problem& problem, int round_index, const RoundRecord& s_round);
  double evaluate(int step) const;

  const std::vector<Problem>& train_problems() const { return train_; }
  const std::vector<Problem>& heldout_problems() const { return heldout_; }
  Policy& sneaky_policy() { return *sneaky_; }
  Policy& diagnosis_policy() { return *diagnosis_; }
  ToySoftmaxPolicy* toy_policy() { return toy_.get(); }

  nlohmann::json transcript_header() const;
  std::filesystem::path run_dir() const { return run_dir_; }

 private:
  struct RoundOutcome {
    RoundRecord record;
    RoleContext update_ctx;
    GroupBatch batch;
  };

  RoundOutcome play_round_once(const Problem& problem, int round_index,
                               const RoundRecord* s_round, std::uint64_t attempt);
  void apply_update(RoundOutcome& outcome, int round_index);
  const Problem& problem_for_round(int round_index) const;
  void persist_state(int next_round, const std::vector<EvalPoint>& evals) const;
  void write_manifest(const std::vector<EvalPoint>& evals, int selected_step) const;
  std::string snapshot_checkpoint(int step, double acc) const;

  RunConfig cfg_;
  Tokenizer tokenizer_;
  CanonicalChecker checker_;
  std::filesystem::path run_dir_;

  std::vector<Problem> train_;
  std::vector<Problem> heldout_;

  std::shared_ptr<ToySoftmaxPolicy> toy_;  // set when S/D are toy-backed (shared parameters)
  std::shared_ptr<Policy> sneaky_;
  std::shared_ptr<Policy> diagnosis_;
  std::shared_ptr<Policy> corrector_;
};

}  // namespace hsg
