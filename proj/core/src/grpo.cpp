#include "hsg/grpo.hpp"

#include <algorithm>
#include <cmath>

#include "hsg/errors.hpp"

namespace hsg {

void GrpoConfig::validate() const {
  if (group_size < 2) throw config_error("grpo_config", "group_size must be >= 2");
  if (!(clip_epsilon > 0.0 && clip_epsilon < 1.0)) {
    throw config_error("grpo_config", "clip_epsilon must lie in (0,1)");
  }
  if (!(beta_kl_s >= 0.0) || !(beta_kl_d >= 0.0)) {
    throw config_error("grpo_config", "beta_kl coefficients must be >= 0");
  }
  if (!(delta > 0.0)) throw config_error("grpo_config", "delta must be > 0");
}

GrpoConfig GrpoConfig::from_json(const nlohmann::json& j) {
  GrpoConfig cfg;
  for (const auto& [key, value] : j.items()) {
    if (key == "group_size") {
      cfg.group_size = value.get<int>();
    } else if (key == "clip_epsilon") {
      cfg.clip_epsilon = value.get<double>();
    } else if (key == "beta_kl_s") {
      cfg.beta_kl_s = value.get<double>();
    } else if (key == "beta_kl_d") {
      cfg.beta_kl_d = value.get<double>();
    } else if (key == "delta") {
      cfg.delta = value.get<double>();
    } else {
      throw config_error("grpo_config", "unknown grpo config field: " + key);
    }
  }
  cfg.validate();
  return cfg;
}

nlohmann::json GrpoConfig::to_json() const {
  return {{"group_size", group_size},
          {"clip_epsilon", clip_epsilon},
          {"beta_kl_s", beta_kl_s},
          {"beta_kl_d", beta_kl_d},
          {"delta", delta}};
}

void GroupBatch::validate() const {
  const std::size_t g = rewards.size();
  if (g == 0) throw assertion_error("empty_batch", "group batch has no samples");
  if (advantages.size() != g || logprob_new.size() != g || logprob_old.size() != g ||
      logprob_ref.size() != g) {
    throw assertion_error("ragged_batch", "group batch vectors must share one length");
  }
  if (!sample_ids.empty() && sample_ids.size() != g) {
    throw assertion_error("ragged_batch", "sample_ids length must match the group size");
  }
  if (hardest_index < 0 || static_cast<std::size_t>(hardest_index) >= g) {
    throw assertion_error("bad_hardest_index", "hardest_index out of range");
  }
}

std::vector<double> group_advantage(std::span<const double> rewards, double delta) {
  if (rewards.empty()) throw assertion_error("empty_group", "cannot standardize an empty group");
  if (!(delta > 0.0)) throw assertion_error("bad_delta", "delta must be > 0");
  const double g = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= g;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  var /= g;  // population variance, divisor G
  const double sd = std::sqrt(var);
  std::vector<double> advantages(rewards.size());
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    advantages[i] = (rewards[i] - mean) / (sd + delta);
  }
  return advantages;
}

int argmax_reward(std::span<const double> rewards) {
  if (rewards.empty()) throw assertion_error("empty_group", "argmax over an empty group");
  int best = 0;
  for (std::size_t i = 1; i < rewards.size(); ++i) {
    if (rewards[i] > rewards[best]) best = static_cast<int>(i);
  }
  return best;
}

double importance_ratio(double logprob_new, double logprob_old) {
  if (!std::isfinite(logprob_new) || !std::isfinite(logprob_old)) {
    throw assertion_error("ratio_overflow", "non-finite log-probabilities in importance ratio");
  }
  const double ratio = std::exp(logprob_new - logprob_old);
  if (!std::isfinite(ratio)) {
    throw assertion_error("ratio_overflow", "importance ratio overflowed (divergent policies)");
  }
  return ratio;
}

double clipped_term(double ratio, double advantage, double epsilon) {
  const double clipped = std::clamp(ratio, 1.0 - epsilon, 1.0 + epsilon);
  return std::min(ratio * advantage, clipped * advantage);
}

double kl_from_probs(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw assertion_error("support_mismatch", "KL over distributions of different support size");
  }
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] <= 0.0) {
      throw assertion_error("support_mismatch",
                            "reference assigns zero probability where the policy does not");
    }
    kl += p[i] * std::log(p[i] / q[i]);
  }
  return std::max(kl, 0.0);
}

double kl_sample_estimate(double logprob_new, double logprob_ref) {
  const double d = logprob_ref - logprob_new;
  return std::exp(d) - d - 1.0;
}

double kl_estimate(const GroupBatch& batch) {
  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    total += kl_sample_estimate(batch.logprob_new[i], batch.logprob_ref[i]);
  }
  return total / static_cast<double>(batch.size());
}

double surrogate_mean(const GroupBatch& batch, double epsilon) {
  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double ratio = importance_ratio(batch.logprob_new[i], batch.logprob_old[i]);
    total += clipped_term(ratio, batch.advantages[i], epsilon);
  }
  return total / static_cast<double>(batch.size());
}

double grpo_objective(const GroupBatch& batch, const GrpoConfig& cfg, double beta_kl, double kl) {
  batch.validate();
  return surrogate_mean(batch, cfg.clip_epsilon) - beta_kl * kl;
}

double grpo_objective(const GroupBatch& batch, const GrpoConfig& cfg, double beta_kl) {
  batch.validate();
  return surrogate_mean(batch, cfg.clip_epsilon) - beta_kl * kl_estimate(batch);
}

std::vector<double> log_softmax(std::span<const double> logits, double temperature) {
  if (logits.empty()) throw assertion_error("empty_support", "softmax over empty support");
  if (!(temperature > 0.0)) throw assertion_error("bad_temperature", "temperature must be > 0");
  std::vector<double> scaled(logits.size());
  double max_scaled = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < logits.size(); ++i) {
    scaled[i] = logits[i] / temperature;
    max_scaled = std::max(max_scaled, scaled[i]);
  }
  double total = 0.0;
  for (double s : scaled) total += std::exp(s - max_scaled);
  const double log_norm = max_scaled + std::log(total);
  for (double& s : scaled) s -= log_norm;
  return scaled;
}

std::vector<double> softmax(std::span<const double> logits, double temperature) {
  std::vector<double> probs = log_softmax(logits, temperature);
  for (double& p : probs) p = std::exp(p);
  return probs;
}

namespace {

void check_gradient_input(const ToyGradientInput& in) {
  if (in.logits.empty() || in.ref_probs.size() != in.logits.size()) {
    throw assertion_error("bad_gradient_input", "logits and ref_probs must share the support");
  }
  const std::size_t g = in.actions.size();
  if (g == 0 || in.advantages.size() != g || in.logprob_old.size() != g) {
    throw assertion_error("bad_gradient_input", "actions/advantages/logprob_old must align");
  }
  for (int a : in.actions) {
    if (a < 0 || static_cast<std::size_t>(a) >= in.logits.size()) {
      throw assertion_error("bad_gradient_input", "action index outside the support");
    }
  }
}

}  // namespace

std::vector<double> toy_policy_gradient(const ToyGradientInput& in, const GrpoConfig& cfg,
                                        double beta_kl) {
  check_gradient_input(in);
  const std::size_t k = in.logits.size();
  const std::size_t g = in.actions.size();
  const std::vector<double> logp = log_softmax(in.logits, in.temperature);
  std::vector<double> probs(k);
  for (std::size_t i = 0; i < k; ++i) probs[i] = std::exp(logp[i]);

  std::vector<double> grad(k, 0.0);

  // Surrogate part: each sample contributes A*rho*grad(log pi) unless the min
  // selected the saturated clip branch, whose derivative is zero.
  const double inv_g = 1.0 / static_cast<double>(g);
  for (std::size_t i = 0; i < g; ++i) {
    const int a = in.actions[i];
    const double ratio = importance_ratio(logp[a], in.logprob_old[i]);
    const double unclipped = ratio * in.advantages[i];
    const double clipped =
        std::clamp(ratio, 1.0 - cfg.clip_epsilon, 1.0 + cfg.clip_epsilon) * in.advantages[i];
    if (unclipped > clipped) continue;
    const double coeff = inv_g * in.advantages[i] * ratio / in.temperature;
    for (std::size_t j = 0; j < k; ++j) {
      grad[j] += coeff * ((static_cast<int>(j) == a ? 1.0 : 0.0) - probs[j]);
    }
  }

  if (beta_kl != 0.0) {
    const double kl = kl_from_probs(probs, in.ref_probs);
    for (std::size_t j = 0; j < k; ++j) {
      const double dkl = (probs[j] / in.temperature) * (std::log(probs[j] / in.ref_probs[j]) - kl);
      grad[j] -= beta_kl * dkl;
    }
  }
  return grad;
}

double toy_objective(const ToyGradientInput& in, const GrpoConfig& cfg, double beta_kl) {
  check_gradient_input(in);
  const std::vector<double> logp = log_softmax(in.logits, in.temperature);
  std::vector<double> probs(logp.size());
  for (std::size_t i = 0; i < logp.size(); ++i) probs[i] = std::exp(logp[i]);

  double surrogate = 0.0;
  for (std::size_t i = 0; i < in.actions.size(); ++i) {
    const double ratio = importance_ratio(logp[in.actions[i]], in.logprob_old[i]);
    surrogate += clipped_term(ratio, in.advantages[i], cfg.clip_epsilon);
  }
  surrogate /= static_cast<double>(in.actions.size());
  const double kl = beta_kl != 0.0 ? kl_from_probs(probs, in.ref_probs) : 0.0;
  return surrogate - beta_kl * kl;
}

}  // namespace hsg
