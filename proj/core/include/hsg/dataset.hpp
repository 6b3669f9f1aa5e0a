#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace hsg {

enum class DatasetSource { gsm8k_style, math_style, numina_style, toy };

const char* to_string(DatasetSource source);
DatasetSource dataset_source_from_string(const std::string& s);

struct DatasetRecord {
  std::string id;
  std::string question;
  std::string reference_answer;  // must carry exactly one boxed marker
  DatasetSource source = DatasetSource::toy;
  std::string split = "train";

  nlohmann::json to_json() const;
};

struct IngestReport {
  std::vector<DatasetRecord> records;
  long skipped = 0;
  std::vector<std::string> issues;  // "line N: reason"
};

/// Reads and validates a JSON Lines dataset. Malformed lines are skipped and
/// reported with their line numbers; an empty or all-invalid file is an error.
IngestReport ingest(const std::filesystem::path& path, DatasetSource expected_source);

/// Seeded toy problems as dataset records (train + heldout splits).
std::vector<DatasetRecord> generate_toy_records(std::uint64_t seed, int train_count,
                                                int heldout_count, int distractors = 3);

}  // namespace hsg
