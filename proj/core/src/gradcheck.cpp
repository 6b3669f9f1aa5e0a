#include "hsg/gradcheck.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "hsg/rng.hpp"

namespace hsg {

namespace {

constexpr double kFdStep = 1e-5;
constexpr double kKinkMargin = 1e-3;

ToyGradientInput random_input(std::mt19937_64& rng, const GrpoConfig& cfg) {
  std::uniform_int_distribution<int> support_dist(2, 6);
  std::uniform_int_distribution<int> group_dist(2, cfg.group_size);
  std::uniform_real_distribution<double> logit_dist(-1.5, 1.5);
  std::uniform_real_distribution<double> adv_dist(-2.0, 2.0);
  std::uniform_real_distribution<double> temp_dist(0.5, 2.0);

  ToyGradientInput in;
  const int k = support_dist(rng);
  in.temperature = temp_dist(rng);
  in.logits.resize(static_cast<std::size_t>(k));
  for (auto& v : in.logits) v = logit_dist(rng);

  std::vector<double> ref_logits(static_cast<std::size_t>(k));
  for (auto& v : ref_logits) v = logit_dist(rng);
  in.ref_probs = softmax(ref_logits, 1.0);

  // Sampling-time policy: a perturbation of the current one, so ratios sit
  // near but not at 1.
  std::vector<double> old_logits = in.logits;
  std::uniform_real_distribution<double> drift_dist(-0.3, 0.3);
  for (auto& v : old_logits) v += drift_dist(rng);
  const std::vector<double> old_logp = log_softmax(old_logits, in.temperature);

  const int g = group_dist(rng);
  std::uniform_int_distribution<int> action_dist(0, k - 1);
  for (int i = 0; i < g; ++i) {
    const int action = action_dist(rng);
    in.actions.push_back(action);
    in.advantages.push_back(adv_dist(rng));
    in.logprob_old.push_back(old_logp[static_cast<std::size_t>(action)]);
  }
  return in;
}

bool near_clip_kink(const ToyGradientInput& in, const GrpoConfig& cfg) {
  const auto logp = log_softmax(in.logits, in.temperature);
  for (std::size_t i = 0; i < in.actions.size(); ++i) {
    if (std::abs(in.advantages[i]) < 1e-9) continue;  // zero advantage: no kink
    const double ratio =
        std::exp(logp[static_cast<std::size_t>(in.actions[i])] - in.logprob_old[i]);
    if (std::abs(ratio - (1.0 - cfg.clip_epsilon)) < kKinkMargin ||
        std::abs(ratio - (1.0 + cfg.clip_epsilon)) < kKinkMargin) {
      return true;
    }
  }
  return false;
}

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

GradCheckReport run_gradcheck(std::uint64_t seed, int configurations, double tolerance,
                              bool flip_surrogate_sign) {
  GrpoConfig cfg;  // defaults: G=8, eps=0.2, delta=1e-8
  GradCheckReport report;

  std::uint64_t draw = 0;
  while (report.configurations < configurations) {
    auto rng = make_stream(seed, "gradcheck", draw++);
    ToyGradientInput in = random_input(rng, cfg);
    if (near_clip_kink(in, cfg)) continue;

    std::uniform_real_distribution<double> beta_dist(0.0, 0.05);
    const double beta_kl = beta_dist(rng);

    std::vector<double> analytic = toy_policy_gradient(in, cfg, beta_kl);
    if (flip_surrogate_sign) {
      // Deliberate mutation (self-check): the finite-difference oracle must
      // reject a sign-flipped surrogate contribution.
      const std::vector<double> kl_only =
          toy_policy_gradient({in.logits, in.ref_probs, in.temperature, in.actions,
                               std::vector<double>(in.advantages.size(), 0.0), in.logprob_old},
                              cfg, beta_kl);
      for (std::size_t j = 0; j < analytic.size(); ++j) {
        analytic[j] = 2.0 * kl_only[j] - analytic[j];
      }
    }

    std::vector<double> fd(in.logits.size());
    for (std::size_t j = 0; j < in.logits.size(); ++j) {
      ToyGradientInput plus = in;
      ToyGradientInput minus = in;
      plus.logits[j] += kFdStep;
      minus.logits[j] -= kFdStep;
      fd[j] = (toy_objective(plus, cfg, beta_kl) - toy_objective(minus, cfg, beta_kl)) /
              (2.0 * kFdStep);
    }

    std::vector<double> diff(fd.size());
    for (std::size_t j = 0; j < fd.size(); ++j) diff[j] = analytic[j] - fd[j];
    const double err = norm(diff) / std::max({1.0, norm(analytic), norm(fd)});
    report.worst_error = std::max(report.worst_error, err);
    ++report.configurations;
    if (err > tolerance) {
      ++report.failures;
      if (report.failure_notes.size() < 5) {
        std::ostringstream note;
        note << "config " << report.configurations << ": relative error " << err;
        report.failure_notes.push_back(note.str());
      }
    }
  }

  // Stationary case: zero advantages with the policy at the reference must
  // give an (exactly) zero gradient.
  {
    ToyGradientInput in;
    in.logits = {0.0, 0.0, 0.0};
    in.ref_probs = softmax(in.logits, 1.0);
    in.temperature = 1.0;
    in.actions = {0, 1, 2, 1};
    in.advantages = {0.0, 0.0, 0.0, 0.0};
    const auto logp = log_softmax(in.logits, 1.0);
    for (int a : in.actions) in.logprob_old.push_back(logp[static_cast<std::size_t>(a)]);
    const auto grad = toy_policy_gradient(in, cfg, 0.04);
    report.zero_gradient_case_ok = true;
    for (double gj : grad) {
      if (std::abs(gj) > 1e-12) report.zero_gradient_case_ok = false;
    }
  }
  return report;
}

}  // namespace hsg
