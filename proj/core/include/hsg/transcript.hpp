#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hsg/answer.hpp"
#include "hsg/reward.hpp"

namespace hsg {

/// One (a_S, a_D, a_C) tuple with its rewards and the optimizer's view of it.
struct GroupEntry {
  Answer a_s;
  DiagnosticReport a_d;
  Answer a_c;
  RewardBundle rewards;
  double logprob_old = 0.0;
  double logprob_new = 0.0;  // after the round's update
  double logprob_ref = 0.0;
  double advantage = 0.0;
  int sample_id = -1;  // toy candidate / strategy index

  nlohmann::json to_json() const;
  static GroupEntry from_json(const nlohmann::json& j);
};

/// One training round. S rounds store G sneaky samples with their diagnoses;
/// D rounds store one attacked sample a_S* and G diagnoses of it.
struct RoundRecord {
  int round_index = 0;
  char role_updated = 'S';
  std::string problem_id;
  std::string reference_text;
  std::optional<std::string> a_s_star_text;  // D rounds only
  int paired_s_round = -1;                   // D rounds only
  std::vector<GroupEntry> group;
  int hardest_index = 0;
  double objective = 0.0;  // post-update objective value
  double kl = 0.0;         // post-update exact KL against the reference policy

  nlohmann::json to_json() const;
  static RoundRecord from_json(const nlohmann::json& j);
};

/// Append-only JSON Lines transcript: one metadata header line, then one
/// record per round. Headers and records are emitted compactly so reruns with
/// the same seed and config diff empty.
class TranscriptWriter {
 public:
  /// Opens for append; writes the header only when the file is new/empty.
  TranscriptWriter(const std::filesystem::path& path, const nlohmann::json& header);
  void append(const RoundRecord& record);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

struct TranscriptContents {
  nlohmann::json header;
  std::vector<RoundRecord> rounds;
};

TranscriptContents read_transcript(const std::filesystem::path& path);

/// Drops transcript rounds past `keep_rounds` (crash recovery: a round line
/// may have been flushed before the state snapshot that covers it).
void truncate_transcript(const std::filesystem::path& path, std::size_t keep_rounds);

}  // namespace hsg
