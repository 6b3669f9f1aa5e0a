#pragma once

#include <span>
#include <vector>

#include <json.hpp>

namespace hsg {

struct GrpoConfig {
  int group_size = 8;        // G samples per round
  double clip_epsilon = 0.2;
  double beta_kl_s = 0.01;   // KL coefficient for the sneaky role
  double beta_kl_d = 0.04;   // KL coefficient for the diagnosis role
  double delta = 1e-8;       // stabilizer in the advantage denominator

  void validate() const;
  static GrpoConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// One sampled group with everything the update consumes. `sample_ids` holds
/// toy-backend candidate indices (empty for remote backends).
struct GroupBatch {
  std::vector<double> rewards;
  std::vector<double> advantages;
  std::vector<double> logprob_new;
  std::vector<double> logprob_old;
  std::vector<double> logprob_ref;
  std::vector<int> sample_ids;
  int hardest_index = 0;

  std::size_t size() const { return rewards.size(); }
  void validate() const;
};

/// Standardized within-group advantages: (r - mean) / (population std + delta).
std::vector<double> group_advantage(std::span<const double> rewards, double delta);

/// Index of the largest reward, first index on ties.
int argmax_reward(std::span<const double> rewards);

/// exp(logprob_new - logprob_old); throws `ratio_overflow` when the result is
/// not finite (divergent policies).
double importance_ratio(double logprob_new, double logprob_old);

/// min(ratio * A, clip(ratio, 1-eps, 1+eps) * A).
double clipped_term(double ratio, double advantage, double epsilon);

/// Exact KL(p || q) over a shared finite support. Throws `support_mismatch`
/// when q is zero somewhere p is not.
double kl_from_probs(std::span<const double> p, std::span<const double> q);

/// Per-sample KL estimator for sampled policies: exp(d) - d - 1 with
/// d = logprob_ref - logprob_new. Nonnegative, zero iff d == 0.
double kl_sample_estimate(double logprob_new, double logprob_ref);

/// Mean of the per-sample estimator over a batch.
double kl_estimate(const GroupBatch& batch);

/// (1/G) * sum of clipped terms, with ratios taken from the batch logprobs.
double surrogate_mean(const GroupBatch& batch, double epsilon);

/// Objective to maximize: surrogate mean minus beta_kl * kl. The two-argument
/// overload estimates the KL from the batch.
double grpo_objective(const GroupBatch& batch, const GrpoConfig& cfg, double beta_kl, double kl);
double grpo_objective(const GroupBatch& batch, const GrpoConfig& cfg, double beta_kl);

// -- finite-support softmax helpers (shared with the toy backend) --

std::vector<double> softmax(std::span<const double> logits, double temperature);
std::vector<double> log_softmax(std::span<const double> logits, double temperature);

/// Everything the analytic toy gradient needs, free of policy plumbing.
struct ToyGradientInput {
  std::vector<double> logits;      // current parameters for one policy key
  std::vector<double> ref_probs;   // fixed reference distribution, same support
  double temperature = 1.0;
  std::vector<int> actions;        // candidate index per sample
  std::vector<double> advantages;  // per sample
  std::vector<double> logprob_old; // per sample, at sampling time
};

/// Exact gradient of the objective with respect to the logits, treating the
/// sampling-time and reference policies as constants.
std::vector<double> toy_policy_gradient(const ToyGradientInput& in, const GrpoConfig& cfg,
                                        double beta_kl);

/// The same objective as a function of the logits (finite-difference oracle
/// target; uses exact KL).
double toy_objective(const ToyGradientInput& in, const GrpoConfig& cfg, double beta_kl);

}  // namespace hsg
