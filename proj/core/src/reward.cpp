#include "hsg/reward.hpp"

#include <algorithm>
#include <cmath>

#include "hsg/errors.hpp"

namespace hsg {

void RewardConfig::validate() const {
  if (!(tau > 0.0)) throw config_error("reward_config", "tau must be > 0");
  if (!(beta_reward >= 0.5 && beta_reward <= 1.0)) {
    throw config_error("reward_config", "beta_reward must lie in [0.5, 1]");
  }
  if (!(l_min > 0 && l_min < l_max)) {
    throw config_error("reward_config", "need 0 < l_min < l_max");
  }
}

RewardConfig RewardConfig::from_json(const nlohmann::json& j) {
  RewardConfig cfg;
  for (const auto& [key, value] : j.items()) {
    if (key == "tau") {
      cfg.tau = value.get<double>();
    } else if (key == "beta_reward") {
      cfg.beta_reward = value.get<double>();
    } else if (key == "l_min") {
      cfg.l_min = value.get<int>();
    } else if (key == "l_max") {
      cfg.l_max = value.get<int>();
    } else {
      throw config_error("reward_config", "unknown reward config field: " + key);
    }
  }
  cfg.validate();
  return cfg;
}

nlohmann::json RewardConfig::to_json() const {
  return {{"tau", tau}, {"beta_reward", beta_reward}, {"l_min", l_min}, {"l_max", l_max}};
}

double hierarchical_reward(double r_main, double r_secondary, const RewardConfig& cfg) {
  if (!(r_main >= 0.0 && r_main <= 1.0) || !(r_secondary >= 0.0 && r_secondary <= 1.0)) {
    throw assertion_error("reward_domain",
                          "hierarchical_reward inputs must lie in [0,1]; got main=" +
                              std::to_string(r_main) + " secondary=" + std::to_string(r_secondary));
  }
  return std::max(r_main, cfg.tau) * (cfg.beta_reward + (1.0 - cfg.beta_reward) * r_secondary);
}

double correctness_reward(const Answer& candidate, const Answer& reference,
                          const AnswerChecker& checker, long* extraction_failures) {
  if (!reference.final_value) {
    throw data_error("reference_unextractable", "reference answer has no extractable final value");
  }
  if (!candidate.final_value) {
    if (extraction_failures != nullptr) ++*extraction_failures;
    return 0.0;
  }
  return checker.equivalent(*candidate.final_value, *reference.final_value) ? 1.0 : 0.0;
}

double length_reward(int length, const RewardConfig& cfg) {
  if (length < 0) throw assertion_error("reward_domain", "length must be nonnegative");
  const double l = static_cast<double>(length);
  if (length < cfg.l_min) {
    const double ratio = l / static_cast<double>(cfg.l_min);
    return ratio * ratio;
  }
  if (length <= cfg.l_max) return 1.0;
  const double over = l - static_cast<double>(cfg.l_max);
  return 1.0 / (1.0 + over * over);
}

double format_reward(const std::string& text, const FormatSpec& role_template) {
  return role_template.passes(text) ? 1.0 : 0.0;
}

double reward_s(const Answer& a_s, const Answer& reference, const RewardConfig& cfg,
                const AnswerChecker& checker, const FormatSpec& sneaky_template) {
  const double corr = correctness_reward(a_s, reference, checker);
  const double aux =
      hierarchical_reward(format_reward(a_s.text, sneaky_template), length_reward(a_s.length, cfg), cfg);
  return hierarchical_reward(1.0 - corr, aux, cfg);
}

double diagnosis_recognition(const DiagnosticReport& report, bool sneaky_was_correct) {
  if (report.verdict == Verdict::claims_error && !sneaky_was_correct) return 1.0;
  if (report.verdict == Verdict::claims_correct && sneaky_was_correct) return 1.0;
  return 0.0;
}

double reward_d(const DiagnosticReport& report, bool sneaky_was_correct, const RewardConfig& cfg,
                const FormatSpec& diagnosis_template) {
  const double aux = hierarchical_reward(format_reward(report.text, diagnosis_template),
                                         length_reward(report.length, cfg), cfg);
  return hierarchical_reward(diagnosis_recognition(report, sneaky_was_correct), aux, cfg);
}

double collaborative_reward_d(double r_d, double correction_success, const RewardConfig& cfg) {
  return hierarchical_reward(r_d, correction_success, cfg);
}

double adversarial_reward_s(double r_s, double r_d_collab, double correction_success,
                            const RewardConfig& cfg) {
  const double aux = hierarchical_reward(1.0 - r_d_collab, 1.0 - correction_success, cfg);
  return hierarchical_reward(r_s, aux, cfg);
}

RewardBundle compute_bundle(const Answer& a_s, const DiagnosticReport& a_d, const Answer& a_c,
                            const Answer& reference, const RewardConfig& cfg,
                            const AnswerChecker& checker, const FormatSpec& sneaky_template,
                            const FormatSpec& diagnosis_template) {
  RewardBundle b;
  b.r_corr_s = correctness_reward(a_s, reference, checker);
  b.r_format_s = format_reward(a_s.text, sneaky_template);
  b.r_length_s = length_reward(a_s.length, cfg);
  b.r_s = hierarchical_reward(1.0 - b.r_corr_s,
                              hierarchical_reward(b.r_format_s, b.r_length_s, cfg), cfg);

  const bool sneaky_was_correct = b.r_corr_s == 1.0;
  b.gamma_diag = diagnosis_recognition(a_d, sneaky_was_correct);
  b.r_format_d = format_reward(a_d.text, diagnosis_template);
  b.r_length_d = length_reward(a_d.length, cfg);
  b.r_d = hierarchical_reward(b.gamma_diag, hierarchical_reward(b.r_format_d, b.r_length_d, cfg), cfg);

  b.r_corr_c = correctness_reward(a_c, reference, checker);
  b.r_d_collab = collaborative_reward_d(b.r_d, b.r_corr_c, cfg);
  b.r_s_adv = adversarial_reward_s(b.r_s, b.r_d_collab, b.r_corr_c, cfg);
  return b;
}

nlohmann::json RewardBundle::to_json() const {
  return {{"r_corr_s", r_corr_s},   {"r_format_s", r_format_s}, {"r_length_s", r_length_s},
          {"r_s", r_s},             {"gamma_diag", gamma_diag}, {"r_format_d", r_format_d},
          {"r_length_d", r_length_d}, {"r_d", r_d},             {"r_corr_c", r_corr_c},
          {"r_d_collab", r_d_collab}, {"r_s_adv", r_s_adv}};
}

RewardBundle RewardBundle::from_json(const nlohmann::json& j) {
  RewardBundle b;
  b.r_corr_s = j.at("r_corr_s").get<double>();
  b.r_format_s = j.at("r_format_s").get<double>();
  b.r_length_s = j.at("r_length_s").get<double>();
  b.r_s = j.at("r_s").get<double>();
  b.gamma_diag = j.at("gamma_diag").get<double>();
  b.r_format_d = j.at("r_format_d").get<double>();
  b.r_length_d = j.at("r_length_d").get<double>();
  b.r_d = j.at("r_d").get<double>();
  b.r_corr_c = j.at("r_corr_c").get<double>();
  b.r_d_collab = j.at("r_d_collab").get<double>();
  b.r_s_adv = j.at("r_s_adv").get<double>();
  return b;
}

}  // namespace hsg
