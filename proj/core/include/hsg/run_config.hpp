#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hsg/dataset.hpp"
#include "hsg/endpoint_client.hpp"
#include "hsg/format_spec.hpp"
#include "hsg/grpo.hpp"
#include "hsg/reward.hpp"

namespace hsg {

/// Backend selection for one actor.
struct BackendConfig {
  BackendConfig() = default;
  explicit BackendConfig(std::string k) : kind(std::move(k)) {}

  std::string kind = "toy";  // toy | mock | endpoint | rule | none
  EndpointConfig endpoint;   // used when kind == endpoint
  std::string mock_text;     // used when kind == mock
  std::vector<std::string> mock_queue;  // consumed before mock_text
  double mock_logprob = -1.0;

  static BackendConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct ToyBackendConfig {
  double temperature = 1.0;
  double learning_rate = 0.5;  // gradient-ascent step applied once per round
  int distractors = 3;

  static ToyBackendConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct DatasetPathConfig {
  std::string path;
  DatasetSource source = DatasetSource::toy;
  double weight = 1.0;
};

struct DatasetConfig {
  // Either the seeded generator (default) or explicit JSONL paths.
  bool use_generator = true;
  std::uint64_t generator_seed = 0;  // 0 derives from the run seed
  int train_count = 48;
  int heldout_count = 64;  // held-out slice used for checkpoint evaluation
  std::vector<DatasetPathConfig> paths;

  static DatasetConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// The single declarative run document. Unknown fields are rejected so config
/// drift fails loudly; a persisted config plus its seed replays a toy run.
struct RunConfig {
  int schema_version = 1;
  std::uint64_t seed = 0;
  int steps = 600;
  int eval_interval = 20;
  std::string output_dir = "runs/out";
  std::string tokenizer = "ws-v1";

  RewardConfig reward;
  GrpoConfig grpo;
  ToyBackendConfig toy;
  DatasetConfig dataset;

  BackendConfig sneaky_backend;      // default toy
  BackendConfig diagnosis_backend;   // default toy
  BackendConfig corrector_backend{"rule"};
  BackendConfig judge_backend{"none"};

  FormatSpec sneaky_format = FormatSpec::sneaky_default();
  FormatSpec diagnosis_format = FormatSpec::diagnosis_default();
  std::string template_dir;  // prompt templates for endpoint backends

  void validate() const;
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::string& path);
  nlohmann::json to_json() const;
};

}  // namespace hsg
