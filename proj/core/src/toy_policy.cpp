#include "hsg/toy_policy.hpp"

#include <random>

#include "hsg/errors.hpp"
#include "hsg/rng.hpp"

namespace hsg {

ToySoftmaxPolicy::ToySoftmaxPolicy(double temperature, int distractors)
    : temperature_(temperature), distractors_(distractors) {
  if (!(temperature_ > 0.0)) throw config_error("toy_policy", "temperature must be > 0");
  if (distractors_ < 1) throw config_error("toy_policy", "need at least one distractor");
}

std::string ToySoftmaxPolicy::param_key(Actor role, const std::string& policy_key) {
  return std::string(to_string(role)) + "/" + policy_key;
}

std::vector<std::string> ToySoftmaxPolicy::support(const RoleContext& ctx) const {
  ctx.validate();
  switch (ctx.role) {
    case Actor::sneaky: {
      auto problem = parse_toy_question("ctx", ctx.input("q"), distractors_);
      if (!problem) {
        throw backend_error("unsupported_problem",
                            "toy policy cannot parse question: " + ctx.input("q"));
      }
      std::vector<std::string> texts;
      texts.reserve(problem->sneaky_candidates.size());
      for (const auto& cand : problem->sneaky_candidates) texts.push_back(cand.text);
      return texts;
    }
    case Actor::diagnosis: {
      std::vector<std::string> texts;
      texts.reserve(toy_strategies().size());
      for (const auto& strategy : toy_strategies()) {
        texts.push_back(run_toy_strategy(strategy, ctx.input("a_truth"), ctx.input("a_s"))
                            .report_text);
      }
      return texts;
    }
    default:
      throw backend_error("unsupported_role",
                          std::string("toy policy serves sneaky/diagnosis only, got ") +
                              to_string(ctx.role));
  }
}

int ToySoftmaxPolicy::support_index(const RoleContext& ctx, const std::string& text) const {
  const auto texts = support(ctx);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (texts[i] == text) return static_cast<int>(i);
  }
  return -1;
}

const std::vector<double>& ToySoftmaxPolicy::logits(Actor role, const std::string& key) const {
  static const std::vector<double> empty;
  auto it = params_.find(param_key(role, key));
  return it == params_.end() ? empty : it->second;
}

std::vector<double>& ToySoftmaxPolicy::mutable_logits(Actor role, const std::string& key,
                                                      std::size_t size) {
  auto& logits = params_[param_key(role, key)];
  if (logits.size() != size) logits.assign(size, 0.0);
  return logits;
}

std::vector<double> ToySoftmaxPolicy::probabilities(const RoleContext& ctx) const {
  const auto texts = support(ctx);
  const auto& raw = logits(ctx.role, ctx.input("policy_key"));
  std::vector<double> theta = raw.size() == texts.size() ? raw : std::vector<double>(texts.size(), 0.0);
  return softmax(theta, temperature_);
}

std::vector<double> ToySoftmaxPolicy::reference_probs(std::size_t support_size) const {
  return std::vector<double>(support_size, 1.0 / static_cast<double>(support_size));
}

std::vector<Generation> ToySoftmaxPolicy::sample(const RoleContext& ctx, int n,
                                                 std::uint64_t seed) {
  if (n < 1) throw assertion_error("bad_sample_count", "sample count must be >= 1");
  const auto texts = support(ctx);
  const auto probs = probabilities(ctx);
  std::vector<double> logp(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) logp[i] = std::log(probs[i]);

  std::vector<Generation> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    // Independent per-draw stream: reruns and resumed runs see identical draws.
    auto rng = make_stream(seed, "draw", static_cast<std::uint64_t>(i));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double u = unit(rng);
    double cum = 0.0;
    std::size_t pick = probs.size() - 1;
    for (std::size_t k = 0; k < probs.size(); ++k) {
      cum += probs[k];
      if (u < cum) {
        pick = k;
        break;
      }
    }
    Generation g;
    g.text = texts[pick];
    g.logprob = logp[pick];
    out.push_back(std::move(g));
  }
  return out;
}

double ToySoftmaxPolicy::logprob(const RoleContext& ctx, const std::string& text) {
  const int idx = support_index(ctx, text);
  if (idx < 0) {
    throw backend_error("unsupported_scoring", "text is outside the toy policy support");
  }
  const auto probs = probabilities(ctx);
  return std::log(probs[static_cast<std::size_t>(idx)]);
}

nlohmann::json ToySoftmaxPolicy::snapshot() const {
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [key, logits] : params_) params[key] = logits;
  return {{"backend", backend_id()},
          {"temperature", temperature_},
          {"distractors", distractors_},
          {"params", params}};
}

void ToySoftmaxPolicy::restore(const nlohmann::json& snapshot) {
  if (snapshot.value("backend", "") != backend_id()) {
    throw data_error("bad_snapshot", "snapshot was not produced by the toy softmax backend");
  }
  temperature_ = snapshot.at("temperature").get<double>();
  distractors_ = snapshot.at("distractors").get<int>();
  params_.clear();
  for (const auto& [key, logits] : snapshot.at("params").items()) {
    params_[key] = logits.get<std::vector<double>>();
  }
}

std::vector<double> toy_policy_gradient(const ToySoftmaxPolicy& policy, const RoleContext& ctx,
                                        const GroupBatch& batch, const GrpoConfig& cfg,
                                        double beta_kl) {
  batch.validate();
  if (batch.sample_ids.empty()) {
    throw assertion_error("bad_gradient_input", "toy gradient needs candidate indices");
  }
  const auto texts = policy.support(ctx);
  ToyGradientInput in;
  const auto& raw = policy.logits(ctx.role, ctx.input("policy_key"));
  in.logits = raw.size() == texts.size() ? raw : std::vector<double>(texts.size(), 0.0);
  in.ref_probs = policy.reference_probs(texts.size());
  in.temperature = policy.temperature();
  in.actions = batch.sample_ids;
  in.advantages = batch.advantages;
  in.logprob_old = batch.logprob_old;
  return toy_policy_gradient(in, cfg, beta_kl);
}

}  // namespace hsg
