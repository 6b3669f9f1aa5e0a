#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace hsg {

/// Recomputes a run from its persisted artifacts and diffs it against what
/// was recorded:
///   - every RewardBundle from the stored (a_S, a_D, a_C, reference) texts
///     plus the transcript header's reward config;
///   - advantages, hardest_index, and the objective from the stored rewards
///     and log-probabilities;
///   - D rounds' a_S* against the paired S round's hardest entry;
///   - the checkpoint manifest's selection rule (minimum held-out ACC_corr);
///   - with `recompute_evals`, every checkpoint's held-out accuracy from its
///     policy snapshot (generator datasets only).
struct ReplayResult {
  long rounds_checked = 0;
  long entries_checked = 0;
  long evals_checked = 0;
  std::vector<std::string> issues;
  bool ok() const { return issues.empty(); }
};

ReplayResult replay_audit(const std::filesystem::path& run_dir, bool recompute_evals = true);

}  // namespace hsg
