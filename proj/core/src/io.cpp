#include "cbandit/io.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace cbandit {

using nlohmann::json;

namespace {

json context_to_json(const ContextVector& x) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < x.size(); ++i) arr.push_back(x[i]);
  return arr;
}

ContextVector context_from_json(const json& arr) {
  if (!arr.is_array()) throw std::runtime_error("context is not an array");
  ContextVector x(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    x[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  }
  return x;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  return in;
}

}  // namespace

EventLogReadResult read_event_log(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::vector<LoggedEvent> events;
  std::vector<ParseDiagnostic> diags;
  std::string line;
  std::size_t lineno = 0;
  EventId next_id = 0;
  int dim = -1;
  int max_arm = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      LoggedEvent e;
      e.context = context_from_json(j.at("context"));
      e.arm = j.at("arm").get<ArmId>();
      e.propensity = j.at("propensity").get<double>();
      e.outcome = j.at("outcome").get<double>();
      if (j.contains("event_id")) {
        e.event_id = j.at("event_id").get<EventId>();
        next_id = std::max(next_id, e.event_id + 1);
      } else {
        e.event_id = next_id++;
      }
      if (dim < 0) dim = static_cast<int>(e.context.size());
      max_arm = std::max(max_arm, e.arm);
      events.push_back(std::move(e));
    } catch (const std::exception& ex) {
      diags.push_back({lineno, ex.what()});
    }
  }
  int num_arms = std::max(max_arm, 1);
  EventLogReadResult result;
  result.dataset = Dataset(std::move(events), std::max(dim, 0), num_arms);
  result.diagnostics = std::move(diags);
  return result;
}

void write_event_log(const std::filesystem::path& path, const Dataset& dataset) {
  std::ofstream out = open_out(path);
  for (const LoggedEvent& e : dataset.events()) {
    json j;
    j["context"] = context_to_json(e.context);
    j["arm"] = e.arm;
    j["propensity"] = e.propensity;
    j["outcome"] = e.outcome;
    j["event_id"] = e.event_id;
    out << j.dump() << '\n';
  }
}

void write_training_file(const std::filesystem::path& path,
                         const TargetFileMeta& meta,
                         const std::vector<TrainingExample>& examples) {
  std::ofstream out = open_out(path);
  json header;
  header["meta"] = {{"sample_size", meta.sample_size},
                    {"m_prime", meta.m_prime},
                    {"seed", meta.seed},
                    {"skipped", meta.skipped},
                    {"mode", meta.mode}};
  out << header.dump() << '\n';
  for (const TrainingExample& ex : examples) {
    json j;
    j["context"] = context_to_json(ex.context);
    j["arm"] = ex.arm;
    j["target"] = ex.incremental_target;
    out << j.dump() << '\n';
  }
}

TrainingFile read_training_file(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("training file is empty: " + path.string());
  }
  TrainingFile file;
  json header = json::parse(line);
  const json& m = header.at("meta");
  file.meta.sample_size = m.at("sample_size").get<std::uint64_t>();
  file.meta.m_prime = m.at("m_prime").get<std::uint64_t>();
  file.meta.seed = m.at("seed").get<std::uint64_t>();
  file.meta.skipped = m.at("skipped").get<std::uint64_t>();
  file.meta.mode = m.at("mode").get<std::string>();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    TrainingExample ex;
    ex.context = context_from_json(j.at("context"));
    ex.arm = j.at("arm").get<ArmId>();
    ex.incremental_target = j.at("target").get<double>();
    file.examples.push_back(std::move(ex));
  }
  return file;
}

void write_decision_log(const std::filesystem::path& path,
                        const std::vector<DecisionRecord>& decisions) {
  std::ofstream out = open_out(path);
  for (const DecisionRecord& d : decisions) {
    json j;
    j["decision_id"] = d.decision_id;
    j["context"] = context_to_json(d.context);
    j["chosen_arm"] = d.chosen_arm;
    j["propensity_estimate"] = d.propensity_estimate;
    out << j.dump() << '\n';
  }
}

std::vector<DecisionRecord> read_decision_log(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::vector<DecisionRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    DecisionRecord d;
    d.decision_id = j.at("decision_id").get<std::int64_t>();
    d.context = context_from_json(j.at("context"));
    d.chosen_arm = j.at("chosen_arm").get<ArmId>();
    d.propensity_estimate = j.at("propensity_estimate").get<double>();
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace cbandit
