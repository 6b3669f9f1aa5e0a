#include <doctest.h>

#include <cmath>
#include <set>

#include "hsg/corrector.hpp"
#include "hsg/errors.hpp"
#include "hsg/rng.hpp"
#include "hsg/toy_policy.hpp"

using namespace hsg;

namespace {

const ToyProblem& sample_problem() {
  static const ToyProblem p = make_toy_problem("t-0", "sum_mul", 7, 3, 4);
  return p;  // (7+3)*4 = 40
}

RoleContext sneaky_ctx(const ToyProblem& p) {
  return RoleContext{Actor::sneaky, "sneaky", {{"q", p.question}, {"policy_key", p.archetype}}};
}

RoleContext diagnosis_ctx(const ToyProblem& p, const std::string& a_s) {
  return RoleContext{Actor::diagnosis,
                     "diagnosis",
                     {{"a_truth", p.reference_text}, {"a_s", a_s}, {"policy_key", p.archetype}}};
}

const ToyCandidate& candidate(const ToyProblem& p, const std::string& kind) {
  for (const auto& c : p.sneaky_candidates) {
    if (c.kind == kind) return c;
  }
  throw std::runtime_error("no candidate " + kind);
}

}  // namespace

TEST_CASE("toy problems expose distinct, reconstructible candidates") {
  const auto& p = sample_problem();
  CHECK(p.truth == 40);
  CHECK(p.question == "Compute (7 + 3) * 4.");
  CHECK(p.sneaky_candidates.size() == 4);  // reference + 3 distractors
  CHECK(p.sneaky_candidates.front().kind == "honest");
  CHECK(p.sneaky_candidates.front().text == p.reference_text);

  std::set<long> values;
  for (const auto& c : p.sneaky_candidates) values.insert(c.boxed);
  CHECK(values.size() == 4);

  const auto reparsed = parse_toy_question(p.id, p.question);
  REQUIRE(reparsed.has_value());
  CHECK(reparsed->reference_text == p.reference_text);
  for (std::size_t i = 0; i < p.sneaky_candidates.size(); ++i) {
    CHECK(reparsed->sneaky_candidates[i].text == p.sneaky_candidates[i].text);
  }
  CHECK_FALSE(parse_toy_question("x", "What is seven plus three?").has_value());
  // b = 0 collapses the stealthy candidate onto the honest one.
  CHECK_FALSE(parse_toy_question("x", "Compute (5 + 0) * 3.").has_value());
}

TEST_CASE("diagnostic strategies form the intended detection matrix") {
  const auto& p = sample_problem();
  const auto verdict_on = [&](const std::string& strategy, const std::string& kind) {
    const auto diag = run_toy_strategy(strategy, p.reference_text, candidate(p, kind).text);
    return parse_verdict(diag.report_text);
  };

  // trust accepts everything.
  for (const char* kind : {"honest", "stealthy", "shift", "blatant"}) {
    CHECK(verdict_on("trust", kind) == Verdict::claims_correct);
  }
  // scan flags only the self-admitted answer.
  CHECK(verdict_on("scan", "blatant") == Verdict::claims_error);
  for (const char* kind : {"honest", "stealthy", "shift"}) {
    CHECK(verdict_on("scan", kind) == Verdict::claims_correct);
  }
  // recompute flags only the internally inconsistent answer.
  CHECK(verdict_on("recompute", "shift") == Verdict::claims_error);
  for (const char* kind : {"honest", "stealthy", "blatant"}) {
    CHECK(verdict_on("recompute", kind) == Verdict::claims_correct);
  }
  // combo = scan or recompute; the consistent misreading still slips through.
  CHECK(verdict_on("combo", "shift") == Verdict::claims_error);
  CHECK(verdict_on("combo", "blatant") == Verdict::claims_error);
  CHECK(verdict_on("combo", "honest") == Verdict::claims_correct);
  CHECK(verdict_on("combo", "stealthy") == Verdict::claims_correct);

  // Error-claiming reports cite a correction value that actually fixes shift
  // and blatant answers.
  for (const char* kind : {"shift", "blatant"}) {
    const auto diag = run_toy_strategy("combo", p.reference_text, candidate(p, kind).text);
    const auto value = extract_correction_value(diag.report_text);
    REQUIRE(value.has_value());
    CHECK(*value == p.truth);
  }
}

TEST_CASE("strategy realizations are pairwise distinct per answer") {
  const auto& p = sample_problem();
  for (const auto& c : p.sneaky_candidates) {
    std::set<std::string> texts;
    for (const auto& strategy : toy_strategies()) {
      texts.insert(run_toy_strategy(strategy, p.reference_text, c.text).report_text);
    }
    CHECK(texts.size() == toy_strategies().size());
  }
}

TEST_CASE("toy sampling frequencies sit within binomial bounds") {
  const auto& p = sample_problem();
  ToySoftmaxPolicy policy;
  const auto ctx = sneaky_ctx(p);

  const int n = 10000;
  const auto generations = policy.sample(ctx, n, stream_key(99, "freq"));
  std::map<std::string, int> counts;
  for (const auto& g : generations) {
    ++counts[g.text];
    CHECK(g.logprob == doctest::Approx(std::log(0.25)).epsilon(1e-12));
  }
  // Uniform over 4 candidates: each count within 3 sigma of n/4.
  const double sigma = std::sqrt(n * 0.25 * 0.75);
  for (const auto& c : p.sneaky_candidates) {
    CHECK(std::abs(counts[c.text] - n * 0.25) <= 3.0 * sigma);
  }
}

TEST_CASE("two-candidate uniform sampling stays within 3 sigma of one half") {
  ToySoftmaxPolicy policy(1.0, /*distractors=*/1);
  const auto& p = sample_problem();
  const auto ctx = sneaky_ctx(p);
  CHECK(policy.support(ctx).size() == 2);
  CHECK(policy.logprob(ctx, p.reference_text) == doctest::Approx(std::log(0.5)).epsilon(1e-12));

  const int n = 10000;
  const auto generations = policy.sample(ctx, n, stream_key(3, "binomial"));
  int reference_draws = 0;
  for (const auto& g : generations) {
    if (g.text == p.reference_text) ++reference_draws;
  }
  const double sigma = std::sqrt(n * 0.25);
  CHECK(std::abs(reference_draws - n * 0.5) <= 3.0 * sigma);
}

TEST_CASE("a dominant logit wins essentially every draw") {
  const auto& p = sample_problem();
  ToySoftmaxPolicy policy;
  auto& logits = policy.mutable_logits(Actor::sneaky, p.archetype, 4);
  logits[2] = 20.0;  // one-hot

  const auto generations = policy.sample(sneaky_ctx(p), 10000, stream_key(7, "onehot"));
  int favored = 0;
  for (const auto& g : generations) {
    if (g.text == p.sneaky_candidates[2].text) ++favored;
  }
  CHECK(favored >= 9999);
}

TEST_CASE("toy logprob matches the softmax") {
  const auto& p = sample_problem();
  ToySoftmaxPolicy policy;
  const auto ctx = sneaky_ctx(p);
  CHECK(policy.logprob(ctx, p.sneaky_candidates[0].text) ==
        doctest::Approx(std::log(0.25)).epsilon(1e-12));

  auto& logits = policy.mutable_logits(Actor::sneaky, p.archetype, 4);
  logits[0] = 1.0;
  const double expected = 1.0 - std::log(std::exp(1.0) + 3.0);  // log(e / (e + 3))
  CHECK(policy.logprob(ctx, p.sneaky_candidates[0].text) ==
        doctest::Approx(expected).epsilon(1e-12));
  CHECK_THROWS_AS(policy.logprob(ctx, "not in support"), Error);

  // Probabilities sum to one.
  double total = 0.0;
  for (double prob : policy.probabilities(ctx)) total += prob;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sampling is reproducible and per-call streams are independent") {
  const auto& p = sample_problem();
  ToySoftmaxPolicy policy;
  const auto ctx = sneaky_ctx(p);
  const auto a = policy.sample(ctx, 16, stream_key(42, "rep"));
  const auto b = policy.sample(ctx, 16, stream_key(42, "rep"));
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].text == b[i].text);

  const auto c = policy.sample(ctx, 16, stream_key(43, "rep"));
  bool any_difference = false;
  for (std::size_t i = 0; i < a.size(); ++i) any_difference |= a[i].text != c[i].text;
  CHECK(any_difference);
}

TEST_CASE("role parameters are disjoint: an S update never moves D") {
  const auto& p = sample_problem();
  ToySoftmaxPolicy policy;
  const auto d_ctx = diagnosis_ctx(p, candidate(p, "shift").text);
  const auto d_support = policy.support(d_ctx);
  const double before = policy.logprob(d_ctx, d_support[0]);

  auto& s_logits = policy.mutable_logits(Actor::sneaky, p.archetype, 4);
  s_logits[1] += 5.0;
  CHECK(policy.logprob(d_ctx, d_support[0]) == before);

  auto& d_logits = policy.mutable_logits(Actor::diagnosis, p.archetype, 4);
  d_logits[0] += 1.0;
  CHECK(policy.logprob(d_ctx, d_support[0]) != before);
}

TEST_CASE("snapshot round trip restores the parameters exactly") {
  const auto& p = sample_problem();
  ToySoftmaxPolicy policy;
  auto& logits = policy.mutable_logits(Actor::sneaky, p.archetype, 4);
  logits = {0.125, -2.5, 3.75, 0.0};
  const auto snap = nlohmann::json::parse(policy.snapshot().dump());

  ToySoftmaxPolicy restored;
  restored.restore(snap);
  CHECK(restored.logits(Actor::sneaky, p.archetype) == logits);
}

TEST_CASE("role context validation") {
  RoleContext sneaky{Actor::sneaky, "sneaky", {}};
  CHECK_THROWS_AS(sneaky.validate(), Error);
  sneaky.inputs["q"] = "Compute (1 + 1) * 2.";
  CHECK_NOTHROW(sneaky.validate());

  RoleContext diagnosis{Actor::diagnosis, "diagnosis", {{"a_truth", "t"}}};
  CHECK_THROWS_AS(diagnosis.validate(), Error);
  diagnosis.inputs["a_s"] = "x";
  CHECK_NOTHROW(diagnosis.validate());

  // The corrector never sees the question.
  RoleContext correction{Actor::correction, "", {{"a_s", "x"}, {"a_d", "y"}, {"q", "nope"}}};
  CHECK_THROWS_AS(correction.validate(), Error);
  correction.inputs.erase("q");
  CHECK_NOTHROW(correction.validate());
}

TEST_CASE("rule corrector trusts the diagnosis") {
  const Tokenizer tok;
  RuleBasedCorrector corrector;
  const auto& p = sample_problem();

  // Report claims correct: the wrong answer passes through unchanged.
  const Answer wrong = make_answer(candidate(p, "shift").text, Role::sneaky, tok);
  const auto ok_report = make_report("Verdict: CORRECT\nall good.", tok);
  CHECK(correct_answer(corrector, wrong, ok_report, tok).text == wrong.text);

  // Report names the correct value: the boxed value is replaced.
  const Answer wrong41 = make_answer("The final answer is \\boxed{41}", Role::sneaky, tok);
  const auto fix_report =
      make_report("Verdict: INCORRECT\nthe boxed line is off; correct value 42.", tok);
  const Answer fixed = correct_answer(corrector, wrong41, fix_report, tok);
  REQUIRE(fixed.final_value.has_value());
  CHECK(*fixed.final_value == "42");
  CHECK(fixed.role == Role::correction);

  // Correct answer, report claims correct: unchanged and still correct.
  const Answer right = make_answer(candidate(p, "honest").text, Role::sneaky, tok);
  const Answer kept = correct_answer(corrector, right, ok_report, tok);
  CHECK(kept.text == right.text);
  CHECK(*kept.final_value == std::to_string(p.truth));

  // No named value: the corrector recomputes from the answer's own steps.
  const Answer miscalc =
      make_answer("Step 1: 7 + 3 = 10\nStep 2: 10 * 4 = 44\nThe final answer is \\boxed{44}",
                  Role::sneaky, tok);
  const auto localized = make_report("Verdict: INCORRECT\nStep 2 does not hold.", tok);
  const Answer recomputed = correct_answer(corrector, miscalc, localized, tok);
  REQUIRE(recomputed.final_value.has_value());
  CHECK(*recomputed.final_value == "40");

  // Unparseable verdicts leave the answer alone.
  const auto mush = make_report("hmm, unclear", tok);
  CHECK(correct_answer(corrector, wrong41, mush, tok).text == wrong41.text);
}

TEST_CASE("corrector has no trainable state") {
  const Tokenizer tok;
  RuleBasedCorrector corrector;
  const Answer a = make_answer("The final answer is \\boxed{41}", Role::sneaky, tok);
  const auto report = make_report("Verdict: INCORRECT\nshould be 42.", tok);
  const auto first = correct_answer(corrector, a, report, tok).text;
  for (int i = 0; i < 50; ++i) {
    CHECK(correct_answer(corrector, a, report, tok).text == first);
  }
}

TEST_CASE("mock policy is scripted and deterministic") {
  MockPolicy mock("fixed response", -2.5);
  RoleContext ctx{Actor::sneaky, "sneaky", {{"q", "Compute (1 + 2) * 3."}}};
  const auto out = mock.sample(ctx, 3, 0);
  for (const auto& g : out) {
    CHECK(g.text == "fixed response");
    CHECK(*g.logprob == -2.5);
  }
  mock.enqueue("first");
  mock.enqueue("second");
  const auto scripted = mock.sample(ctx, 3, 0);
  CHECK(scripted[0].text == "first");
  CHECK(scripted[1].text == "second");
  CHECK(scripted[2].text == "fixed response");

  mock.fail_next(1);
  CHECK_THROWS_AS(mock.sample(ctx, 1, 0), Error);
  CHECK_NOTHROW(mock.sample(ctx, 1, 0));
}

TEST_CASE("derive_from_steps substitutes recomputed intermediates") {
  // Step 1 is wrong (7+3 != 11); the chain substitution fixes step 2's operand.
  const auto derived =
      derive_from_steps("Step 1: 7 + 3 = 11\nStep 2: 11 * 4 = 44\n\\boxed{44}");
  REQUIRE(derived.has_value());
  CHECK(*derived == 40);
  CHECK_FALSE(derive_from_steps("no steps at all").has_value());
}
