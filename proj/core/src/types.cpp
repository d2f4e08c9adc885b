#include "cbandit/types.hpp"

#include <cmath>
#include <unordered_set>

namespace cbandit {

Dataset::Dataset(std::vector<LoggedEvent> events, int dimension, int num_arms)
    : events_(std::move(events)), dimension_(dimension), num_arms_(num_arms) {
  by_id_.reserve(events_.size());
  for (std::size_t i = 0; i < events_.size(); ++i) {
    by_id_.emplace(events_[i].event_id, i);
    ++arm_counts_[events_[i].arm];
  }
}

const LoggedEvent* Dataset::find(EventId id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &events_[it->second];
}

std::size_t Dataset::arm_count(ArmId arm) const {
  auto it = arm_counts_.find(arm);
  return it == arm_counts_.end() ? 0 : it->second;
}

std::vector<Violation> validate_dataset(const Dataset& dataset) {
  std::vector<Violation> out;
  std::unordered_set<EventId> seen;
  seen.reserve(dataset.size());
  for (const LoggedEvent& e : dataset.events()) {
    if (!(e.propensity > 0.0) || e.propensity > 1.0 ||
        !std::isfinite(e.propensity)) {
      out.push_back({e.event_id, "propensity",
                     "propensity must lie in (0, 1], got " +
                         std::to_string(e.propensity)});
    }
    if (!std::isfinite(e.outcome)) {
      out.push_back({e.event_id, "outcome", "outcome is not finite"});
    }
    if (e.context.size() != dataset.dimension()) {
      out.push_back({e.event_id, "context",
                     "dimension " + std::to_string(e.context.size()) +
                         " does not match dataset dimension " +
                         std::to_string(dataset.dimension())});
    } else if (!e.context.allFinite()) {
      out.push_back({e.event_id, "context", "context has non-finite values"});
    }
    if (e.arm < 0 || e.arm > dataset.num_arms()) {
      out.push_back({e.event_id, "arm",
                     "arm " + std::to_string(e.arm) + " outside {0.." +
                         std::to_string(dataset.num_arms()) + "}"});
    }
    if (!seen.insert(e.event_id).second) {
      out.push_back({e.event_id, "event_id", "duplicate event id"});
    }
  }
  return out;
}

}  // namespace cbandit
