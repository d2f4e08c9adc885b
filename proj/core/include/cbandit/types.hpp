#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace cbandit {

/// Feature vector of one customer context. Values are expected to lie in
/// [0,1] once the feature pipeline has run, but the type itself does not
/// enforce that.
using ContextVector = Eigen::VectorXd;

/// Campaign indicator. 0 is the reserved no-treatment / control arm,
/// treatments are 1..K.
using ArmId = int;

using EventId = std::int64_t;
inline constexpr EventId kNoEvent = -1;
inline constexpr ArmId kControlArm = 0;

/// One record of the historical log L: (context, arm, logged propensity,
/// observed outcome).
struct LoggedEvent {
  ContextVector context;
  ArmId arm = kControlArm;
  double propensity = 1.0;
  double outcome = 0.0;
  EventId event_id = kNoEvent;
};

/// One training record produced by the incremental-target generator:
/// the target is signed and in business-metric units.
struct TrainingExample {
  ContextVector context;
  ArmId arm = kControlArm;
  double incremental_target = 0.0;
};

/// Immutable collection of logged events sharing one dimensionality d and
/// one arm universe {0..K}. Construction is permissive; use
/// validate_dataset to surface invariant violations as data.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<LoggedEvent> events, int dimension, int num_arms);

  const std::vector<LoggedEvent>& events() const { return events_; }
  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }
  int dimension() const { return dimension_; }
  int num_arms() const { return num_arms_; }

  const LoggedEvent& at(std::size_t i) const { return events_[i]; }

  /// Lookup by event id; nullptr when the id is unknown.
  const LoggedEvent* find(EventId id) const;

  /// Number of events carrying the given arm.
  std::size_t arm_count(ArmId arm) const;

 private:
  std::vector<LoggedEvent> events_;
  int dimension_ = 0;
  int num_arms_ = 0;
  std::unordered_map<EventId, std::size_t> by_id_;
  std::unordered_map<ArmId, std::size_t> arm_counts_;
};

/// One invariant violation found by validate_dataset. Violations are data,
/// not failures: validation never throws on bad values.
struct Violation {
  EventId event_id = kNoEvent;
  std::string field;
  std::string message;
};

/// Checks every record against the dataset invariants: propensity in (0,1],
/// finite outcome, finite context of the declared dimension, arm in {0..K},
/// unique event ids. Returns all violations; empty means ok.
std::vector<Violation> validate_dataset(const Dataset& dataset);

}  // namespace cbandit
