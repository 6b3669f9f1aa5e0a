#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "hsg/reward.hpp"
#include "hsg/rng.hpp"

using namespace hsg;

namespace {

// Independent transcription of the composition, kept separate from the
// implementation on purpose: max(main, tau) * [beta + (1-beta)*secondary].
double oracle_r(double main, double secondary, double tau, double beta) {
  return std::max(main, tau) * (beta + (1.0 - beta) * secondary);
}

std::string words(int n, const std::string& suffix) {
  std::ostringstream out;
  for (int i = 0; i < n; ++i) out << "w ";
  out << suffix;
  return out.str();
}

Answer answer_of(const std::string& text) {
  return make_answer(text, Role::sneaky, Tokenizer());
}

}  // namespace

TEST_CASE("hierarchical reward matches the hand-evaluated corner cases") {
  RewardConfig cfg;  // tau 0.05, beta 0.6
  CHECK(hierarchical_reward(1.0, 1.0, cfg) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(hierarchical_reward(0.0, 1.0, cfg) == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(hierarchical_reward(1.0, 0.0, cfg) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(hierarchical_reward(0.0, 0.0, cfg) == doctest::Approx(0.03).epsilon(1e-12));
}

TEST_CASE("hierarchical reward rejects out-of-range inputs") {
  RewardConfig cfg;
  CHECK_THROWS_AS(hierarchical_reward(-0.1, 0.5, cfg), Error);
  CHECK_THROWS_AS(hierarchical_reward(0.5, 1.1, cfg), Error);
  CHECK_THROWS_AS(hierarchical_reward(std::nan(""), 0.5, cfg), Error);
}

TEST_CASE("hierarchical reward bound, monotonicity, clipping and amplifier") {
  RewardConfig cfg;
  auto rng = make_stream(7, "reward-props");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double floor = cfg.tau * cfg.beta_reward;

  for (int i = 0; i < 20000; ++i) {
    const double m = unit(rng);
    const double s = unit(rng);
    const double r = hierarchical_reward(m, s, cfg);
    CHECK(r >= floor);
    CHECK(r <= 1.0);
    CHECK(r == oracle_r(m, s, cfg.tau, cfg.beta_reward));

    // Monotone in both coordinates.
    const double dm = unit(rng) * (1.0 - m);
    const double ds = unit(rng) * (1.0 - s);
    CHECK(hierarchical_reward(m + dm, s, cfg) >= r);
    CHECK(hierarchical_reward(m, s + ds, cfg) >= r);

    // Below tau the main coordinate is inert.
    const double m_low = unit(rng) * cfg.tau;
    CHECK(hierarchical_reward(m_low, s, cfg) ==
          cfg.tau * (cfg.beta_reward + (1.0 - cfg.beta_reward) * s));

    // Amplifier: a secondary increment scales by max(main, tau)*(1-beta).
    const double diff = hierarchical_reward(m, s + ds, cfg) - r;
    CHECK(diff == doctest::Approx(std::max(m, cfg.tau) * (1.0 - cfg.beta_reward) * ds)
                      .epsilon(1e-12));
  }
}

TEST_CASE("length reward piecewise values and boundary continuity") {
  RewardConfig cfg;  // l_min 50, l_max 600
  CHECK(length_reward(50, cfg) == 1.0);
  CHECK(length_reward(25, cfg) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(length_reward(601, cfg) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(length_reward(0, cfg) == 0.0);
  CHECK(length_reward(600, cfg) == 1.0);
  CHECK(length_reward(49, cfg) < 1.0);
  CHECK(length_reward(49, cfg) == doctest::Approx((49.0 / 50.0) * (49.0 / 50.0)).epsilon(1e-12));
  CHECK(length_reward(601, cfg) < 1.0);
  CHECK_THROWS_AS(length_reward(-1, cfg), Error);
}

TEST_CASE("format reward against the role templates") {
  const FormatSpec sneaky = FormatSpec::sneaky_default();
  CHECK(format_reward("...so the answer is \\boxed{7}.", sneaky) == 1.0);
  CHECK(format_reward("...the answer is 7.", sneaky) == 0.0);
  CHECK(format_reward("\\boxed{1} then \\boxed{2}", sneaky) == 0.0);

  const FormatSpec diagnosis = FormatSpec::diagnosis_default();
  CHECK(format_reward("Verdict: INCORRECT\nStep 3 misapplies the distributive law.", diagnosis) ==
        1.0);
  CHECK(format_reward("Verdict: INCORRECT", diagnosis) == 0.0);   // no rationale
  CHECK(format_reward("Step 3 looks wrong to me.", diagnosis) == 0.0);  // no verdict line
}

TEST_CASE("correctness reward uses canonical equivalence") {
  CanonicalChecker checker;
  const Answer reference = make_answer("\\boxed{42}", Role::reference, Tokenizer());
  CHECK(correctness_reward(answer_of("\\boxed{42}"), reference, checker) == 1.0);
  // 084/2 evaluates to the same canonical rational as 42.
  CHECK(correctness_reward(answer_of("\\boxed{084/2}"), reference, checker) == 1.0);
  CHECK(correctness_reward(answer_of("\\boxed{41}"), reference, checker) == 0.0);

  long failures = 0;
  CHECK(correctness_reward(answer_of("no boxed value here"), reference, checker, &failures) == 0.0);
  CHECK(failures == 1);
}

TEST_CASE("canonical checker corner cases") {
  CanonicalChecker checker;
  CHECK(checker.equivalent("42", "42.0"));
  CHECK(checker.equivalent("\\frac{84}{2}", "42"));
  CHECK(checker.equivalent("1/2", "0.5"));
  CHECK(checker.equivalent(" 42 ", "42."));
  CHECK(checker.equivalent("$42$", "42"));
  CHECK(checker.equivalent("1,234", "1234"));
  CHECK_FALSE(checker.equivalent("42", "43"));
  CHECK_FALSE(checker.equivalent("x+1", "42"));
  CHECK(checker.equivalent("X + 1", "x  + 1"));
  CHECK_FALSE(checker.equivalent("-1/2", "1/2"));
  CHECK(checker.equivalent("-3/6", "-0.5"));
}

TEST_CASE("sneaky reward composition") {
  RewardConfig cfg;
  CanonicalChecker checker;
  const FormatSpec tmpl = FormatSpec::sneaky_default();
  const Answer reference = answer_of(words(60, "\\boxed{42}"));

  // Incorrect, well formatted, in-range length -> R(1, R(1,1)) = 1.
  CHECK(reward_s(answer_of(words(60, "\\boxed{41}")), reference, cfg, checker, tmpl) ==
        doctest::Approx(1.0).epsilon(1e-12));
  // Correct, well formatted, in-range length -> R(0, 1) = 0.05.
  CHECK(reward_s(answer_of(words(60, "\\boxed{42}")), reference, cfg, checker, tmpl) ==
        doctest::Approx(0.05).epsilon(1e-12));
  // Incorrect, format fail (no boxed marker), 25 tokens:
  // inner R(0, 0.25) = 0.05 * 0.7 = 0.035; outer R(1, 0.035) = 0.614.
  CHECK(reward_s(answer_of(words(24, "41")), reference, cfg, checker, tmpl) ==
        doctest::Approx(0.614).epsilon(1e-12));
}

TEST_CASE("diagnosis recognition truth table") {
  const Tokenizer tok;
  const auto err = make_report("Verdict: INCORRECT\nbecause.", tok);
  const auto ok = make_report("Verdict: CORRECT\nlooks fine.", tok);
  const auto mush = make_report("hard to say, really", tok);
  CHECK(diagnosis_recognition(err, false) == 1.0);
  CHECK(diagnosis_recognition(err, true) == 0.0);
  CHECK(diagnosis_recognition(ok, true) == 1.0);
  CHECK(diagnosis_recognition(ok, false) == 0.0);
  CHECK(diagnosis_recognition(mush, true) == 0.0);
  CHECK(diagnosis_recognition(mush, false) == 0.0);
}

TEST_CASE("diagnosis reward composition") {
  RewardConfig cfg;
  const FormatSpec tmpl = FormatSpec::diagnosis_default();
  const Tokenizer tok;

  const auto good = make_report("Verdict: INCORRECT\n" + words(58, "the third step slips."), tok);
  CHECK(reward_d(good, false, cfg, tmpl) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(reward_d(good, true, cfg, tmpl) == doctest::Approx(0.05).epsilon(1e-12));

  // Correct verdict, bad format (missing rationale), in-range length:
  // inner R(r_format=0, r_length=1) = max(0, 0.05)*(0.6+0.4) = 0.05,
  // outer R(1, 0.05) = 0.6 + 0.4*0.05 = 0.62.
  std::ostringstream padded;
  padded << "Verdict: INCORRECT";
  for (int i = 0; i < 58; ++i) padded << " word" << i;  // single line: no rationale line
  const auto bad_format = make_report(padded.str(), tok);
  CHECK(format_reward(bad_format.text, tmpl) == 0.0);
  CHECK(bad_format.length >= cfg.l_min);
  CHECK(reward_d(bad_format, false, cfg, tmpl) == doctest::Approx(0.62).epsilon(1e-12));
}

TEST_CASE("feedback rewards") {
  RewardConfig cfg;
  CHECK(collaborative_reward_d(1.0, 1.0, cfg) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(collaborative_reward_d(1.0, 0.0, cfg) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(collaborative_reward_d(0.05, 1.0, cfg) == doctest::Approx(0.05).epsilon(1e-12));

  CHECK(adversarial_reward_s(1.0, 0.03, 0.0, cfg) == doctest::Approx(0.988).epsilon(1e-12));
  CHECK(adversarial_reward_s(1.0, 1.0, 1.0, cfg) == doctest::Approx(0.612).epsilon(1e-12));
  CHECK(adversarial_reward_s(0.0, 1.0, 1.0, cfg) == doctest::Approx(0.0306).epsilon(1e-12));
}

TEST_CASE("zero-one leaves and bundle determinism") {
  RewardConfig cfg;
  cfg.l_min = 2;
  cfg.l_max = 80;
  CanonicalChecker checker;
  const FormatSpec s_tmpl = FormatSpec::sneaky_default();
  const FormatSpec d_tmpl = FormatSpec::diagnosis_default();
  const Tokenizer tok;

  const Answer reference = make_answer("Step 1: 1 + 1 = 2\n\\boxed{2}", Role::reference, tok);
  const Answer a_s = make_answer("Step 1: 1 + 1 = 2\n\\boxed{3}", Role::sneaky, tok);
  const auto a_d = make_report("Verdict: INCORRECT\nthe correct value is 2.", tok);
  const Answer a_c = make_answer("Step 1: 1 + 1 = 2\n\\boxed{2}", Role::correction, tok);

  const RewardBundle b1 = compute_bundle(a_s, a_d, a_c, reference, cfg, checker, s_tmpl, d_tmpl);
  const RewardBundle b2 = compute_bundle(a_s, a_d, a_c, reference, cfg, checker, s_tmpl, d_tmpl);
  CHECK(b1 == b2);  // bit-identical

  for (double leaf : {b1.r_corr_s, b1.r_format_s, b1.gamma_diag, b1.r_format_d, b1.r_corr_c}) {
    CHECK((leaf == 0.0 || leaf == 1.0));
  }
  for (double nested : {b1.r_s, b1.r_d, b1.r_d_collab, b1.r_s_adv}) {
    CHECK(nested >= cfg.tau * cfg.beta_reward);
    CHECK(nested <= 1.0);
  }
  // JSON round trip preserves every double exactly.
  CHECK(RewardBundle::from_json(nlohmann::json::parse(b1.to_json().dump())) == b1);
}
