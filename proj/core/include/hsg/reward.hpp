#pragma once

#include <json.hpp>

#include "hsg/answer.hpp"
#include "hsg/checker.hpp"
#include "hsg/format_spec.hpp"

namespace hsg {

/// Parameters of the hierarchical reward composition and the length window.
struct RewardConfig {
  double tau = 0.05;         // lower bound on the main reward
  double beta_reward = 0.6;  // weighting coefficient of the auxiliary term
  int l_min = 50;            // token-count window, inclusive
  int l_max = 600;

  void validate() const;
  static RewardConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// Every scalar produced for one (a_S, a_D, a_C) triple, nesting made explicit.
struct RewardBundle {
  double r_corr_s = 0.0;
  double r_format_s = 0.0;
  double r_length_s = 0.0;
  double r_s = 0.0;  // sneaky individual reward
  double gamma_diag = 0.0;
  double r_format_d = 0.0;
  double r_length_d = 0.0;
  double r_d = 0.0;  // diagnosis individual reward
  double r_corr_c = 0.0;
  double r_d_collab = 0.0;  // diagnosis collaborative feedback
  double r_s_adv = 0.0;     // sneaky adversarial feedback

  nlohmann::json to_json() const;
  static RewardBundle from_json(const nlohmann::json& j);
  bool operator==(const RewardBundle&) const = default;
};

// The composition R(main, secondary) = max(main, tau) * [beta + (1-beta)*secondary].
// The main reward scales how much the secondary one can matter; the tau floor
// keeps a failed main objective from silencing the auxiliary signal entirely.
// Inputs outside [0,1] indicate a pipeline bug and throw (assertion category).
double hierarchical_reward(double r_main, double r_secondary, const RewardConfig& cfg);

/// 1 iff the checker deems the candidate's final value equivalent to the
/// reference's. A candidate without an extractable value scores 0; when
/// `extraction_failures` is given, such cases are counted there.
double correctness_reward(const Answer& candidate, const Answer& reference,
                          const AnswerChecker& checker, long* extraction_failures = nullptr);

// Piecewise in the token count: (L/L_min)^2 below the window, 1 inside,
// 1/(1+(L-L_max)^2) above.
double length_reward(int length, const RewardConfig& cfg);

double format_reward(const std::string& text, const FormatSpec& role_template);

/// Sneaky individual reward: R(1 - r_corr(a_S), R(r_format, r_length)).
double reward_s(const Answer& a_s, const Answer& reference, const RewardConfig& cfg,
                const AnswerChecker& checker, const FormatSpec& sneaky_template);

/// 1 iff the report's verdict matches the sneaky answer's actual correctness.
/// Unparseable verdicts never match.
double diagnosis_recognition(const DiagnosticReport& report, bool sneaky_was_correct);

/// Diagnosis individual reward: R(gamma_diag, R(r_format, r_length)).
double reward_d(const DiagnosticReport& report, bool sneaky_was_correct, const RewardConfig& cfg,
                const FormatSpec& diagnosis_template);

/// Collaborative feedback for D: R(R_D, r_corr(a_C)).
double collaborative_reward_d(double r_d, double correction_success, const RewardConfig& cfg);

/// Adversarial feedback for S: R(R_S, R(1 - R_D_collab, 1 - r_corr(a_C))).
double adversarial_reward_s(double r_s, double r_d_collab, double correction_success,
                            const RewardConfig& cfg);

/// Full bundle for one transcript tuple.
RewardBundle compute_bundle(const Answer& a_s, const DiagnosticReport& a_d, const Answer& a_c,
                            const Answer& reference, const RewardConfig& cfg,
                            const AnswerChecker& checker, const FormatSpec& sneaky_template,
                            const FormatSpec& diagnosis_template);

}  // namespace hsg
