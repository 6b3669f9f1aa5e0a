#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "hsg/grpo.hpp"
#include "hsg/policy.hpp"
#include "hsg/toy_domain.hpp"

namespace hsg {

/// Differentiable finite-support stand-in for the trainable model. One
/// instance carries both roles ("parameter-shared model, prompt-driven"):
/// parameters live in a map keyed by (role, policy key), so role updates are
/// disjoint by construction. Sneaky support is the problem's candidate list;
/// diagnosis support is the strategy list realized against (a_truth, a_S).
class ToySoftmaxPolicy : public Policy {
 public:
  explicit ToySoftmaxPolicy(double temperature = 1.0, int distractors = 3);

  std::vector<Generation> sample(const RoleContext& ctx, int n, std::uint64_t seed) override;
  double logprob(const RoleContext& ctx, const std::string& text) override;
  std::string backend_id() const override { return "toy-softmax"; }

  /// Realized support texts for a context, in candidate order.
  std::vector<std::string> support(const RoleContext& ctx) const;
  /// Index of `text` within the context's support, or -1.
  int support_index(const RoleContext& ctx, const std::string& text) const;

  const std::vector<double>& logits(Actor role, const std::string& key) const;
  std::vector<double>& mutable_logits(Actor role, const std::string& key, std::size_t size);
  std::vector<double> probabilities(const RoleContext& ctx) const;
  /// Fixed reference distribution (the initial policy): uniform over support.
  std::vector<double> reference_probs(std::size_t support_size) const;

  double temperature() const { return temperature_; }
  int distractors() const { return distractors_; }

  nlohmann::json snapshot() const;
  void restore(const nlohmann::json& snapshot);

  static std::string param_key(Actor role, const std::string& policy_key);

 private:
  double temperature_;
  int distractors_;
  std::map<std::string, std::vector<double>> params_;  // ordered for determinism
};

/// Spec-shaped entry point: exact gradient of the objective with respect to
/// the logits behind `ctx`, from a sampled batch (sample_ids holds candidate
/// indices). Thin wrapper over the numeric core in grpo.
std::vector<double> toy_policy_gradient(const ToySoftmaxPolicy& policy, const RoleContext& ctx,
                                        const GroupBatch& batch, const GrpoConfig& cfg,
                                        double beta_kl);

}  // namespace hsg
