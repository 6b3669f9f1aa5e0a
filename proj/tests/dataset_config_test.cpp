#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "hsg/dataset.hpp"
#include "hsg/toy_domain.hpp"
#include "hsg/errors.hpp"
#include "hsg/run_config.hpp"

using namespace hsg;

namespace {

std::filesystem::path temp_file(const std::string& name, const std::string& contents) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path, std::ios::trunc);
  out << contents;
  return path;
}

}  // namespace

TEST_CASE("ingest: empty file is an error") {
  const auto path = temp_file("hsg-empty.jsonl", "");
  try {
    ingest(path, DatasetSource::toy);
    FAIL("expected empty_dataset");
  } catch (const Error& e) {
    CHECK(e.code() == "empty_dataset");
    CHECK(e.category() == ErrorCategory::data);
  }
}

TEST_CASE("ingest: one valid line yields one record") {
  const auto path = temp_file(
      "hsg-one.jsonl",
      R"({"id":"p1","question":"Compute (3 + 2) * 4.","reference_answer":"Step 1: 3 + 2 = 5\nStep 2: 5 * 4 = 20\nThe final answer is \\boxed{20}","source":"toy","split":"train"})"
      "\n");
  const auto report = ingest(path, DatasetSource::toy);
  CHECK(report.records.size() == 1);
  CHECK(report.skipped == 0);
  CHECK(report.records[0].id == "p1");
}

TEST_CASE("ingest: malformed lines are skipped and reported with line numbers") {
  const auto path = temp_file(
      "hsg-mixed.jsonl",
      R"({"id":"p1","question":"Compute (3 + 2) * 4.","reference_answer":"Step 1: 3 + 2 = 5\nStep 2: 5 * 4 = 20\nThe final answer is \\boxed{20}","source":"toy"})"
      "\n"
      R"({"id":"p2","question":"Compute (3 + 2) * 4.","reference_answer":"no boxed value","source":"toy"})"
      "\n"
      "this is not json\n");
  const auto report = ingest(path, DatasetSource::toy);
  CHECK(report.records.size() == 1);
  CHECK(report.skipped == 2);
  REQUIRE(report.issues.size() == 2);
  CHECK(report.issues[0].find("line 2") != std::string::npos);
  CHECK(report.issues[1].find("line 3") != std::string::npos);
}

TEST_CASE("ingest: all-invalid file raises schema_violation") {
  const auto path = temp_file("hsg-bad.jsonl", "not json\nalso not json\n");
  try {
    ingest(path, DatasetSource::toy);
    FAIL("expected schema_violation");
  } catch (const Error& e) {
    CHECK(e.code() == "schema_violation");
  }
}

TEST_CASE("toy generator emits valid, split records") {
  const auto records = generate_toy_records(17, 10, 6);
  CHECK(records.size() == 16);
  int train = 0;
  int heldout = 0;
  for (const auto& r : records) {
    CHECK(r.source == DatasetSource::toy);
    (r.split == "train" ? train : heldout)++;
    CHECK(parse_toy_question(r.id, r.question).has_value());
  }
  CHECK(train == 10);
  CHECK(heldout == 6);

  // Seeded: regeneration is identical.
  const auto again = generate_toy_records(17, 10, 6);
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(records[i].question == again[i].question);
  }
}

TEST_CASE("run config round-trips and rejects unknown fields") {
  RunConfig cfg;
  cfg.seed = 99;
  cfg.steps = 24;
  cfg.output_dir = "runs/x";
  const auto j = cfg.to_json();
  const RunConfig back = RunConfig::from_json(j);
  CHECK(back.to_json() == j);

  nlohmann::json drifted = j;
  drifted["surprise_field"] = 1;
  CHECK_THROWS_AS(RunConfig::from_json(drifted), Error);

  nlohmann::json bad_reward = j;
  bad_reward["reward"]["typo"] = 1;
  CHECK_THROWS_AS(RunConfig::from_json(bad_reward), Error);
}

TEST_CASE("run config validation catches bad hyperparameters") {
  nlohmann::json j = RunConfig{}.to_json();
  j["reward"]["beta_reward"] = 0.4;  // outside [0.5, 1]
  CHECK_THROWS_AS(RunConfig::from_json(j), Error);

  j = RunConfig{}.to_json();
  j["grpo"]["group_size"] = 1;
  CHECK_THROWS_AS(RunConfig::from_json(j), Error);

  j = RunConfig{}.to_json();
  j["reward"]["l_min"] = 700;  // l_min >= l_max
  CHECK_THROWS_AS(RunConfig::from_json(j), Error);

  // Mixed toy/non-toy trainable backends break parameter sharing.
  j = RunConfig{}.to_json();
  j["backends"]["diagnosis"] = {{"kind", "mock"}, {"mock_text", "x"}, {"mock_logprob", -1.0}};
  CHECK_THROWS_AS(RunConfig::from_json(j), Error);
}

TEST_CASE("paper-stated defaults") {
  const RunConfig cfg;
  CHECK(cfg.reward.tau == 0.05);
  CHECK(cfg.reward.beta_reward == 0.6);
  CHECK(cfg.reward.l_min == 50);
  CHECK(cfg.reward.l_max == 600);
  CHECK(cfg.grpo.group_size == 8);
  CHECK(cfg.grpo.clip_epsilon == 0.2);
  CHECK(cfg.grpo.beta_kl_s == 0.01);
  CHECK(cfg.grpo.beta_kl_d == 0.04);
  CHECK(cfg.grpo.delta == 1e-8);
  CHECK(cfg.steps == 600);
}

TEST_CASE("dataset config: paths mode and weights") {
  const auto j = nlohmann::json::parse(
      R"({"paths":[{"path":"a.jsonl","source":"gsm8k-style","weight":2.0}]})");
  const auto cfg = DatasetConfig::from_json(j);
  CHECK_FALSE(cfg.use_generator);
  REQUIRE(cfg.paths.size() == 1);
  CHECK(cfg.paths[0].source == DatasetSource::gsm8k_style);
  CHECK(cfg.paths[0].weight == 2.0);

  CHECK_THROWS_AS(DatasetConfig::from_json(nlohmann::json::parse(
                      R"({"paths":[{"path":"a.jsonl","weight":0.0}]})")),
                  Error);
}
