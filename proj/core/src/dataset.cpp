#include "hsg/dataset.hpp"

#include <fstream>

#include "hsg/errors.hpp"
#include "hsg/format_spec.hpp"
#include "hsg/toy_domain.hpp"

namespace hsg {

const char* to_string(DatasetSource source) {
  switch (source) {
    case DatasetSource::gsm8k_style: return "gsm8k-style";
    case DatasetSource::math_style: return "math-style";
    case DatasetSource::numina_style: return "numina-style";
    case DatasetSource::toy: return "toy";
  }
  return "?";
}

DatasetSource dataset_source_from_string(const std::string& s) {
  if (s == "gsm8k-style") return DatasetSource::gsm8k_style;
  if (s == "math-style") return DatasetSource::math_style;
  if (s == "numina-style") return DatasetSource::numina_style;
  if (s == "toy") return DatasetSource::toy;
  throw data_error("bad_source", "unknown dataset source: " + s);
}

nlohmann::json DatasetRecord::to_json() const {
  return {{"id", id},
          {"question", question},
          {"reference_answer", reference_answer},
          {"source", to_string(source)},
          {"split", split}};
}

namespace {

std::string validate_record(const DatasetRecord& record) {
  if (record.id.empty()) return "missing id";
  if (record.question.empty()) return "missing question";
  if (record.reference_answer.empty()) return "missing reference answer";
  if (!extract_boxed(record.reference_answer)) {
    return "reference answer has no extractable boxed value";
  }
  if (record.source == DatasetSource::toy && !parse_toy_question(record.id, record.question)) {
    return "toy question does not match any known expression shape";
  }
  return "";
}

}  // namespace

IngestReport ingest(const std::filesystem::path& path, DatasetSource expected_source) {
  std::ifstream in(path);
  if (!in) throw data_error("missing_file", "cannot open dataset file: " + path.string());

  IngestReport report;
  std::string line;
  long line_number = 0;
  bool any_content = false;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    any_content = true;
    DatasetRecord record;
    std::string problem;
    try {
      const auto j = nlohmann::json::parse(line);
      record.id = j.value("id", "");
      record.question = j.value("question", "");
      record.reference_answer = j.value("reference_answer", "");
      record.split = j.value("split", "train");
      const std::string source = j.value("source", std::string(to_string(expected_source)));
      record.source = dataset_source_from_string(source);
      if (record.source != expected_source) {
        problem = "source mismatch: expected " + std::string(to_string(expected_source)) +
                  ", got " + source;
      } else {
        problem = validate_record(record);
      }
    } catch (const nlohmann::json::exception& e) {
      problem = std::string("invalid JSON: ") + e.what();
    } catch (const Error& e) {
      problem = e.what();
    }
    if (problem.empty()) {
      report.records.push_back(std::move(record));
    } else {
      ++report.skipped;
      report.issues.push_back("line " + std::to_string(line_number) + ": " + problem);
    }
  }
  if (!any_content) {
    throw data_error("empty_dataset", "dataset file has no records: " + path.string());
  }
  if (report.records.empty()) {
    throw data_error("schema_violation",
                     "no valid records in " + path.string() + " (" +
                         std::to_string(report.skipped) + " skipped)");
  }
  return report;
}

std::vector<DatasetRecord> generate_toy_records(std::uint64_t seed, int train_count,
                                                int heldout_count, int distractors) {
  const auto problems =
      generate_toy_problems(seed, train_count + heldout_count, "toy-", distractors);
  std::vector<DatasetRecord> records;
  records.reserve(problems.size());
  for (std::size_t i = 0; i < problems.size(); ++i) {
    DatasetRecord r;
    r.id = problems[i].id;
    r.question = problems[i].question;
    r.reference_answer = problems[i].reference_text;
    r.source = DatasetSource::toy;
    r.split = static_cast<int>(i) < train_count ? "train" : "heldout";
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace hsg
