#include <benchmark/benchmark.h>

#include "hsg/corrector.hpp"
#include "hsg/reward.hpp"
#include "hsg/toy_domain.hpp"

namespace {

using namespace hsg;

void BM_HierarchicalReward(benchmark::State& state) {
  RewardConfig cfg;
  double m = 0.0;
  for (auto _ : state) {
    m += 1e-9;
    benchmark::DoNotOptimize(hierarchical_reward(m > 1.0 ? 1.0 : m, 0.5, cfg));
  }
}
BENCHMARK(BM_HierarchicalReward);

void BM_FullRewardBundle(benchmark::State& state) {
  RewardConfig cfg;
  cfg.l_min = 2;
  CanonicalChecker checker;
  const Tokenizer tok;
  const FormatSpec s_tmpl = FormatSpec::sneaky_default();
  const FormatSpec d_tmpl = FormatSpec::diagnosis_default();
  RuleBasedCorrector corrector;

  const ToyProblem p = make_toy_problem("bench", "sum_mul", 7, 3, 4);
  const Answer reference = make_answer(p.reference_text, Role::reference, tok);
  const Answer a_s = make_answer(p.sneaky_candidates[2].text, Role::sneaky, tok);
  const auto diag = run_toy_strategy("combo", p.reference_text, a_s.text);
  const DiagnosticReport a_d = make_report(diag.report_text, tok);
  const Answer a_c = correct_answer(corrector, a_s, a_d, tok);

  for (auto _ : state) {
    benchmark::DoNotOptimize(
        compute_bundle(a_s, a_d, a_c, reference, cfg, checker, s_tmpl, d_tmpl));
  }
}
BENCHMARK(BM_FullRewardBundle);

void BM_BoxedExtraction(benchmark::State& state) {
  const std::string text =
      "Step 1: 7 + 3 = 10\nStep 2: 10 * 4 = 40\nThe final answer is \\boxed{40}";
  for (auto _ : state) {
    benchmark::DoNotOptimize(extract_boxed(text));
  }
}
BENCHMARK(BM_BoxedExtraction);

}  // namespace

BENCHMARK_MAIN();
