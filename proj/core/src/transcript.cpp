#include "hsg/transcript.hpp"

#include <fstream>

#include "hsg/errors.hpp"

namespace hsg {

namespace {

nlohmann::json answer_to_json(const Answer& a) {
  nlohmann::json j{{"text", a.text}, {"len", a.length}, {"role", to_string(a.role)}};
  j["final"] = a.final_value ? nlohmann::json(*a.final_value) : nlohmann::json(nullptr);
  return j;
}

Answer answer_from_json(const nlohmann::json& j) {
  Answer a;
  a.text = j.at("text").get<std::string>();
  a.length = j.at("len").get<int>();
  a.role = role_from_string(j.at("role").get<std::string>());
  if (!j.at("final").is_null()) a.final_value = j.at("final").get<std::string>();
  return a;
}

nlohmann::json report_to_json(const DiagnosticReport& r) {
  return {{"text", r.text}, {"len", r.length}, {"verdict", to_string(r.verdict)}};
}

DiagnosticReport report_from_json(const nlohmann::json& j) {
  DiagnosticReport r;
  r.text = j.at("text").get<std::string>();
  r.length = j.at("len").get<int>();
  r.verdict = verdict_from_string(j.at("verdict").get<std::string>());
  return r;
}

}  // namespace

nlohmann::json GroupEntry::to_json() const {
  return {{"a_s", answer_to_json(a_s)},
          {"a_d", report_to_json(a_d)},
          {"a_c", answer_to_json(a_c)},
          {"rewards", rewards.to_json()},
          {"logprob_old", logprob_old},
          {"logprob_new", logprob_new},
          {"logprob_ref", logprob_ref},
          {"advantage", advantage},
          {"sample_id", sample_id}};
}

GroupEntry GroupEntry::from_json(const nlohmann::json& j) {
  GroupEntry e;
  e.a_s = answer_from_json(j.at("a_s"));
  e.a_d = report_from_json(j.at("a_d"));
  e.a_c = answer_from_json(j.at("a_c"));
  e.rewards = RewardBundle::from_json(j.at("rewards"));
  e.logprob_old = j.at("logprob_old").get<double>();
  e.logprob_new = j.at("logprob_new").get<double>();
  e.logprob_ref = j.at("logprob_ref").get<double>();
  e.advantage = j.at("advantage").get<double>();
  e.sample_id = j.at("sample_id").get<int>();
  return e;
}

nlohmann::json RoundRecord::to_json() const {
  nlohmann::json j{{"round", round_index},
                   {"role", std::string(1, role_updated)},
                   {"problem_id", problem_id},
                   {"reference", reference_text},
                   {"hardest_index", hardest_index},
                   {"objective", objective},
                   {"kl", kl}};
  if (a_s_star_text) {
    j["a_s_star"] = *a_s_star_text;
    j["paired_s_round"] = paired_s_round;
  }
  nlohmann::json group_json = nlohmann::json::array();
  for (const auto& entry : group) group_json.push_back(entry.to_json());
  j["group"] = std::move(group_json);
  return j;
}

RoundRecord RoundRecord::from_json(const nlohmann::json& j) {
  RoundRecord r;
  r.round_index = j.at("round").get<int>();
  r.role_updated = j.at("role").get<std::string>().at(0);
  r.problem_id = j.at("problem_id").get<std::string>();
  r.reference_text = j.at("reference").get<std::string>();
  r.hardest_index = j.at("hardest_index").get<int>();
  r.objective = j.at("objective").get<double>();
  r.kl = j.at("kl").get<double>();
  if (j.contains("a_s_star")) {
    r.a_s_star_text = j.at("a_s_star").get<std::string>();
    r.paired_s_round = j.at("paired_s_round").get<int>();
  }
  for (const auto& entry : j.at("group")) r.group.push_back(GroupEntry::from_json(entry));
  return r;
}

TranscriptWriter::TranscriptWriter(const std::filesystem::path& path,
                                   const nlohmann::json& header)
    : path_(path) {
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  if (fresh) {
    std::ofstream out(path, std::ios::app);
    if (!out) throw data_error("transcript_io", "cannot open transcript: " + path.string());
    out << header.dump() << "\n";
  }
}

void TranscriptWriter::append(const RoundRecord& record) {
  std::ofstream out(path_, std::ios::app);
  if (!out) throw data_error("transcript_io", "cannot append to transcript: " + path_.string());
  out << record.to_json().dump() << "\n";
  out.flush();
}

TranscriptContents read_transcript(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw data_error("transcript_io", "cannot open transcript: " + path.string());
  TranscriptContents contents;
  std::string line;
  long line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw data_error("transcript_io", "transcript line " + std::to_string(line_number) +
                                            " is not valid JSON: " + e.what());
    }
    if (line_number == 1) {
      contents.header = std::move(j);
    } else {
      contents.rounds.push_back(RoundRecord::from_json(j));
    }
  }
  if (contents.header.is_null()) {
    throw data_error("transcript_io", "transcript has no header line: " + path.string());
  }
  return contents;
}

void truncate_transcript(const std::filesystem::path& path, std::size_t keep_rounds) {
  const auto contents = read_transcript(path);
  if (contents.rounds.size() <= keep_rounds) return;
  std::ofstream out(path, std::ios::trunc);
  out << contents.header.dump() << "\n";
  for (std::size_t i = 0; i < keep_rounds; ++i) {
    out << contents.rounds[i].to_json().dump() << "\n";
  }
}

}  // namespace hsg
