#include <doctest.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace std::chrono;

namespace {

namespace fs = std::filesystem;

struct CommandResult {
  int exit_code = -1;
  std::string output;
};

CommandResult run_cli(const std::string& args) {
  const std::string command = std::string(HSG_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CommandResult result;
  char buffer[4096];
  while (fgets(buffer, sizeof(buffer), pipe) != nullptr) result.output += buffer;
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

fs::path write_config(const std::string& name, int steps, int seed) {
  const auto path = fs::temp_directory_path() / name;
  std::ofstream out(path, std::ios::trunc);
  out << R"({
  "schema_version": 1,
  "seed": )" << seed
      << R"(,
  "steps": )" << steps
      << R"(,
  "eval_interval": 5,
  "output_dir": "unused",
  "reward": {"tau": 0.05, "beta_reward": 0.6, "l_min": 5, "l_max": 80},
  "grpo": {"group_size": 4, "clip_epsilon": 0.2, "beta_kl_s": 0.01, "beta_kl_d": 0.04, "delta": 1e-8},
  "toy": {"temperature": 1.0, "learning_rate": 0.5, "distractors": 3},
  "dataset": {"train_count": 6, "heldout_count": 8}
})";
  return path;
}

}  // namespace

TEST_CASE("train: a ten-step smoke run finishes quickly and reruns identically") {
  const auto config = write_config("hsg-cli-smoke.json", 10, 21);
  const auto dir_a = fresh_dir("hsg-cli-a");
  const auto dir_b = fresh_dir("hsg-cli-b");

  const auto start = steady_clock::now();
  const auto first = run_cli("train --config " + config.string() + " --output " + dir_a.string());
  const auto elapsed = duration_cast<seconds>(steady_clock::now() - start);
  CHECK(first.exit_code == 0);
  CHECK(elapsed.count() < 10);
  CHECK(first.output.find("selected checkpoint") != std::string::npos);

  const auto second = run_cli("train --config " + config.string() + " --output " + dir_b.string());
  CHECK(second.exit_code == 0);
  CHECK(slurp(dir_a / "transcript.jsonl") == slurp(dir_b / "transcript.jsonl"));
}

TEST_CASE("train: an interrupted run resumes from the last persisted step") {
  const auto config = write_config("hsg-cli-resume.json", 6, 33);
  const auto dir = fresh_dir("hsg-cli-resume");
  CHECK(run_cli("train --config " + config.string() + " --output " + dir.string()).exit_code == 0);
  // Same directory, extended budget: continues from round 6.
  CHECK(run_cli("train --config " + config.string() + " --output " + dir.string() +
                " --steps 12")
            .exit_code == 0);

  const auto dir_full = fresh_dir("hsg-cli-resume-full");
  CHECK(run_cli("train --config " + config.string() + " --output " + dir_full.string() +
                " --steps 12")
            .exit_code == 0);
  CHECK(slurp(dir / "transcript.jsonl") == slurp(dir_full / "transcript.jsonl"));
}

TEST_CASE("replay verifies a run and rejects a tampered one") {
  const auto config = write_config("hsg-cli-replay.json", 8, 5);
  const auto dir = fresh_dir("hsg-cli-replay");
  REQUIRE(run_cli("train --config " + config.string() + " --output " + dir.string()).exit_code ==
          0);

  const auto ok = run_cli("replay --run " + dir.string());
  CHECK(ok.exit_code == 0);
  CHECK(ok.output.find("replay is exact") != std::string::npos);

  // Flip one reward digit in the transcript.
  auto text = slurp(dir / "transcript.jsonl");
  const auto pos = text.find("\"r_s_adv\":0.");
  REQUIRE(pos != std::string::npos);
  text[pos + 12] = text[pos + 12] == '9' ? '8' : '9';
  {
    std::ofstream out(dir / "transcript.jsonl", std::ios::trunc | std::ios::binary);
    out << text;
  }
  const auto bad = run_cli("replay --run " + dir.string());
  CHECK(bad.exit_code == 5);
  CHECK(bad.output.find("MISMATCH") != std::string::npos);
}

TEST_CASE("eval: fixture tables reproduce the published numbers") {
  const auto out_dir = fresh_dir("hsg-cli-eval");
  const auto result = run_cli(std::string("eval --table1 ") + HSG_FIXTURE_DIR +
                              "/table1_counts.json --table2 " + HSG_FIXTURE_DIR +
                              "/table2_counts.json --out " + out_dir.string());
  CHECK(result.exit_code == 0);
  CHECK(result.output.find("66.15") != std::string::npos);
  CHECK(result.output.find("42.44") != std::string::npos);
  CHECK(result.output.find("26.60") != std::string::npos);

  const auto report = slurp(out_dir / "report.json");
  CHECK(report.find("\"66.15\"") != std::string::npos);
  CHECK(report.find("\"19.15\"") != std::string::npos);
}

TEST_CASE("eval: item fixtures drive live correction and the judge summary") {
  const auto out_dir = fresh_dir("hsg-cli-eval-items");
  const auto result = run_cli(std::string("eval --items ") + HSG_FIXTURE_DIR +
                              "/sample_items.jsonl --out " + out_dir.string());
  CHECK(result.exit_code == 0);
  CHECK(result.output.find("D 20.00%") != std::string::npos);
  CHECK(result.output.find("D* 80.00%") != std::string::npos);
  CHECK(result.output.find("3W/2T/0L = 60.00%") != std::string::npos);
}

TEST_CASE("eval: a mock judge from --config drives the win-rate summary") {
  // Items without precomputed judge passes + a positional mock judge: the
  // order swap must cancel the bias into all ties.
  const auto items = fs::temp_directory_path() / "hsg-cli-judge-items.jsonl";
  {
    std::ofstream out(items, std::ios::trunc);
    for (int i = 0; i < 4; ++i) {
      out << R"({"id":"j)" << i
          << R"(","question":"Compute (7 + 3) * 4.","reference":"Step 1: 7 + 3 = 10\nStep 2: 10 * 4 = 40\nThe final answer is \\boxed{40}","a_s":"The final answer is \\boxed{43}","diag_d":"Verdict: CORRECT\nfine.","diag_dstar":"Verdict: INCORRECT\nthe correct value is 40."})"
          << "\n";
    }
  }
  const auto config = fs::temp_directory_path() / "hsg-cli-judge.json";
  {
    std::ofstream out(config, std::ios::trunc);
    out << R"({"schema_version":1,"backends":{"judge":{"kind":"mock","mock_text":"Choice: A"}}})";
  }
  const auto out_dir = fresh_dir("hsg-cli-judge-out");
  const auto result = run_cli("eval --items " + items.string() + " --config " + config.string() +
                              " --out " + out_dir.string());
  CHECK(result.exit_code == 0);
  CHECK(result.output.find("0W/4T/0L = 0.00%") != std::string::npos);
}

TEST_CASE("eval: no fixtures is a usage error with the data exit code") {
  const auto result = run_cli("eval --out /tmp/hsg-cli-eval-none");
  CHECK(result.exit_code == 3);
}

TEST_CASE("gradcheck passes, self-check catches the planted mutation") {
  const auto result = run_cli("gradcheck --trials 40 --self-check");
  CHECK(result.exit_code == 0);
  CHECK(result.output.find("0 failures") != std::string::npos);
  CHECK(result.output.find("rejected by the oracle") != std::string::npos);
  CHECK(result.output.find("gradcheck passed") != std::string::npos);
}

TEST_CASE("ingest-check reports per-line validation results") {
  const auto path = fs::temp_directory_path() / "hsg-cli-ingest.jsonl";
  {
    std::ofstream out(path, std::ios::trunc);
    out << R"({"id":"p1","question":"Compute (3 + 2) * 4.","reference_answer":"Step 1: 3 + 2 = 5\nStep 2: 5 * 4 = 20\nThe final answer is \\boxed{20}","source":"toy"})"
        << "\n"
        << "not json\n";
  }
  const auto result = run_cli("ingest-check --path " + path.string() + " --source toy");
  CHECK(result.exit_code == 0);
  CHECK(result.output.find("valid records: 1") != std::string::npos);
  CHECK(result.output.find("skipped lines: 1") != std::string::npos);
  CHECK(result.output.find("line 2") != std::string::npos);

  const auto missing = run_cli("ingest-check --path /nonexistent.jsonl --source toy");
  CHECK(missing.exit_code == 3);
}

TEST_CASE("config errors use the config exit code") {
  const auto path = fs::temp_directory_path() / "hsg-cli-badcfg.json";
  {
    std::ofstream out(path, std::ios::trunc);
    out << R"({"schema_version": 1, "mystery_knob": true})";
  }
  const auto result = run_cli("train --config " + path.string());
  CHECK(result.exit_code == 2);
  CHECK(result.output.find("mystery_knob") != std::string::npos);
}
