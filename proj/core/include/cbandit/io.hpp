#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cbandit/types.hpp"

namespace cbandit {

/// A line that could not be turned into a LoggedEvent. Reading is total:
/// malformed lines are reported here, well-formed lines are kept even when
/// their values violate dataset invariants (validate_dataset reports those).
struct ParseDiagnostic {
  std::size_t line = 0;  // 1-based
  std::string message;
};

struct EventLogReadResult {
  Dataset dataset;
  std::vector<ParseDiagnostic> diagnostics;
};

/// Event-log file format: one JSON object per line, keys context (array of
/// decimals), arm (integer), propensity (decimal), outcome (decimal) and
/// optional event_id. Ids missing from the input are assigned as monotone
/// integers in file order.
EventLogReadResult read_event_log(const std::filesystem::path& path);

void write_event_log(const std::filesystem::path& path, const Dataset& dataset);

/// Metadata header line of a training-set file.
struct TargetFileMeta {
  std::uint64_t sample_size = 0;  // M
  std::uint64_t m_prime = 0;      // M'
  std::uint64_t seed = 0;
  std::uint64_t skipped = 0;
  std::string mode;  // "incremental" | "non-incremental"
};

struct TrainingFile {
  TargetFileMeta meta;
  std::vector<TrainingExample> examples;
};

void write_training_file(const std::filesystem::path& path,
                         const TargetFileMeta& meta,
                         const std::vector<TrainingExample>& examples);

TrainingFile read_training_file(const std::filesystem::path& path);

/// Decision-log record as emitted by the bandit: one JSON object per line
/// with decision_id, context, chosen_arm, propensity_estimate.
struct DecisionRecord {
  std::int64_t decision_id = -1;
  ContextVector context;
  ArmId chosen_arm = kControlArm;
  double propensity_estimate = 1.0;
};

void write_decision_log(const std::filesystem::path& path,
                        const std::vector<DecisionRecord>& decisions);

std::vector<DecisionRecord> read_decision_log(const std::filesystem::path& path);

}  // namespace cbandit
