#include "hsg/run_config.hpp"

#include <fstream>

#include "hsg/errors.hpp"
#include "hsg/version.hpp"

namespace hsg {

BackendConfig BackendConfig::from_json(const nlohmann::json& j) {
  BackendConfig cfg;
  for (const auto& [key, value] : j.items()) {
    if (key == "kind") {
      cfg.kind = value.get<std::string>();
    } else if (key == "endpoint") {
      cfg.endpoint = EndpointConfig::from_json(value);
    } else if (key == "mock_text") {
      cfg.mock_text = value.get<std::string>();
    } else if (key == "mock_queue") {
      cfg.mock_queue = value.get<std::vector<std::string>>();
    } else if (key == "mock_logprob") {
      cfg.mock_logprob = value.get<double>();
    } else {
      throw config_error("backend_config", "unknown backend config field: " + key);
    }
  }
  if (cfg.kind != "toy" && cfg.kind != "mock" && cfg.kind != "endpoint" && cfg.kind != "rule" &&
      cfg.kind != "none") {
    throw config_error("backend_config", "unknown backend kind: " + cfg.kind);
  }
  return cfg;
}

nlohmann::json BackendConfig::to_json() const {
  nlohmann::json j{{"kind", kind}};
  if (kind == "endpoint") j["endpoint"] = endpoint.to_json();
  if (kind == "mock") {
    j["mock_text"] = mock_text;
    if (!mock_queue.empty()) j["mock_queue"] = mock_queue;
    j["mock_logprob"] = mock_logprob;
  }
  return j;
}

ToyBackendConfig ToyBackendConfig::from_json(const nlohmann::json& j) {
  ToyBackendConfig cfg;
  for (const auto& [key, value] : j.items()) {
    if (key == "temperature") {
      cfg.temperature = value.get<double>();
    } else if (key == "learning_rate") {
      cfg.learning_rate = value.get<double>();
    } else if (key == "distractors") {
      cfg.distractors = value.get<int>();
    } else {
      throw config_error("toy_config", "unknown toy config field: " + key);
    }
  }
  if (!(cfg.temperature > 0.0)) throw config_error("toy_config", "temperature must be > 0");
  if (!(cfg.learning_rate > 0.0)) throw config_error("toy_config", "learning_rate must be > 0");
  if (cfg.distractors < 1) throw config_error("toy_config", "distractors must be >= 1");
  return cfg;
}

nlohmann::json ToyBackendConfig::to_json() const {
  return {{"temperature", temperature},
          {"learning_rate", learning_rate},
          {"distractors", distractors}};
}

DatasetConfig DatasetConfig::from_json(const nlohmann::json& j) {
  DatasetConfig cfg;
  bool saw_paths = false;
  for (const auto& [key, value] : j.items()) {
    if (key == "generator_seed") {
      cfg.generator_seed = value.get<std::uint64_t>();
    } else if (key == "train_count") {
      cfg.train_count = value.get<int>();
    } else if (key == "heldout_count") {
      cfg.heldout_count = value.get<int>();
    } else if (key == "paths") {
      saw_paths = true;
      for (const auto& pj : value) {
        DatasetPathConfig p;
        for (const auto& [pkey, pvalue] : pj.items()) {
          if (pkey == "path") {
            p.path = pvalue.get<std::string>();
          } else if (pkey == "source") {
            p.source = dataset_source_from_string(pvalue.get<std::string>());
          } else if (pkey == "weight") {
            p.weight = pvalue.get<double>();
          } else {
            throw config_error("dataset_config", "unknown dataset path field: " + pkey);
          }
        }
        if (p.path.empty()) throw config_error("dataset_config", "dataset path entry needs a path");
        if (!(p.weight > 0.0)) throw config_error("dataset_config", "weights must be > 0");
        cfg.paths.push_back(std::move(p));
      }
    } else {
      throw config_error("dataset_config", "unknown dataset config field: " + key);
    }
  }
  cfg.use_generator = !saw_paths;
  if (cfg.use_generator && (cfg.train_count < 1 || cfg.heldout_count < 1)) {
    throw config_error("dataset_config", "generator needs train_count and heldout_count >= 1");
  }
  return cfg;
}

nlohmann::json DatasetConfig::to_json() const {
  nlohmann::json j{{"generator_seed", generator_seed},
                   {"train_count", train_count},
                   {"heldout_count", heldout_count}};
  if (!use_generator) {
    nlohmann::json paths_json = nlohmann::json::array();
    for (const auto& p : paths) {
      paths_json.push_back(
          {{"path", p.path}, {"source", to_string(p.source)}, {"weight", p.weight}});
    }
    j["paths"] = paths_json;
  }
  return j;
}

void RunConfig::validate() const {
  if (schema_version != kConfigSchemaVersion) {
    throw config_error("schema_version",
                       "unsupported config schema version " + std::to_string(schema_version));
  }
  if (steps < 0) throw config_error("run_config", "steps must be >= 0");
  if (eval_interval < 1) throw config_error("run_config", "eval_interval must be >= 1");
  reward.validate();
  grpo.validate();
  if (sneaky_backend.kind == "rule" || diagnosis_backend.kind == "rule") {
    throw config_error("run_config", "the rule backend only serves the corrector");
  }
  if ((sneaky_backend.kind == "toy") != (diagnosis_backend.kind == "toy")) {
    throw config_error("run_config",
                       "sneaky and diagnosis must both be toy-backed or both remote "
                       "(they share parameters)");
  }
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  RunConfig cfg;
  for (const auto& [key, value] : j.items()) {
    if (key == "schema_version") {
      cfg.schema_version = value.get<int>();
    } else if (key == "seed") {
      cfg.seed = value.get<std::uint64_t>();
    } else if (key == "steps") {
      cfg.steps = value.get<int>();
    } else if (key == "eval_interval") {
      cfg.eval_interval = value.get<int>();
    } else if (key == "output_dir") {
      cfg.output_dir = value.get<std::string>();
    } else if (key == "tokenizer") {
      cfg.tokenizer = value.get<std::string>();
    } else if (key == "reward") {
      cfg.reward = RewardConfig::from_json(value);
    } else if (key == "grpo") {
      cfg.grpo = GrpoConfig::from_json(value);
    } else if (key == "toy") {
      cfg.toy = ToyBackendConfig::from_json(value);
    } else if (key == "dataset") {
      cfg.dataset = DatasetConfig::from_json(value);
    } else if (key == "backends") {
      for (const auto& [actor, bj] : value.items()) {
        if (actor == "sneaky") {
          cfg.sneaky_backend = BackendConfig::from_json(bj);
        } else if (actor == "diagnosis") {
          cfg.diagnosis_backend = BackendConfig::from_json(bj);
        } else if (actor == "corrector") {
          cfg.corrector_backend = BackendConfig::from_json(bj);
        } else if (actor == "judge") {
          cfg.judge_backend = BackendConfig::from_json(bj);
        } else {
          throw config_error("run_config", "unknown backend actor: " + actor);
        }
      }
    } else if (key == "sneaky_format") {
      cfg.sneaky_format = FormatSpec::from_json(value);
    } else if (key == "diagnosis_format") {
      cfg.diagnosis_format = FormatSpec::from_json(value);
    } else if (key == "template_dir") {
      cfg.template_dir = value.get<std::string>();
    } else {
      throw config_error("unknown_field", "unknown run config field: " + key);
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("missing_config", "cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw config_error("bad_config", std::string("config is not valid JSON: ") + e.what());
  }
  return from_json(j);
}

nlohmann::json RunConfig::to_json() const {
  return {{"schema_version", schema_version},
          {"seed", seed},
          {"steps", steps},
          {"eval_interval", eval_interval},
          {"output_dir", output_dir},
          {"tokenizer", tokenizer},
          {"reward", reward.to_json()},
          {"grpo", grpo.to_json()},
          {"toy", toy.to_json()},
          {"dataset", dataset.to_json()},
          {"backends",
           {{"sneaky", sneaky_backend.to_json()},
            {"diagnosis", diagnosis_backend.to_json()},
            {"corrector", corrector_backend.to_json()},
            {"judge", judge_backend.to_json()}}},
          {"sneaky_format", sneaky_format.to_json()},
          {"diagnosis_format", diagnosis_format.to_json()},
          {"template_dir", template_dir}};
}

}  // namespace hsg
