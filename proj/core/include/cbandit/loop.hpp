#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cbandit/bandit.hpp"
#include "cbandit/targets.hpp"
#include "cbandit/types.hpp"

namespace cbandit {

/// Source of contexts and delayed outcomes for the online loop. Either a
/// synthetic environment or a replay over a fixed log.
class BanditEnvironment {
 public:
  virtual ~BanditEnvironment() = default;
  virtual ContextVector next_context() = 0;
  /// Realized outcome for playing `arm` on `context`; nullopt when the
  /// source cannot reveal it (log replay with a mismatched action).
  virtual std::optional<double> outcome(const ContextVector& context,
                                        ArmId arm) = 0;
};

/// Replays a fixed log: contexts stream in order (cycling at the end) and
/// an outcome is revealed only when the played arm matches the logged one.
class LogReplayEnvironment final : public BanditEnvironment {
 public:
  explicit LogReplayEnvironment(const Dataset& dataset);
  ContextVector next_context() override;
  std::optional<double> outcome(const ContextVector& context,
                                ArmId arm) override;

 private:
  const Dataset& dataset_;
  std::size_t cursor_ = 0;
  std::size_t last_served_ = 0;
};

struct LoopConfig {
  std::size_t rounds = 0;
  std::size_t contexts_per_round = 0;
  // Rewards of decisions made at round t become available at round t+delay.
  std::size_t reward_delay = 1;
  // Algorithm-1 sample size per training pass; capped by the size of the
  // accumulated completed log.
  std::size_t samples_per_round = 1000;
  std::size_t m_prime = 10;
  MatchMode matching_mode = MatchMode::exact;
  std::uint64_t seed = 0;
};

struct LoopResult {
  std::vector<std::vector<Decision>> decisions_by_round;
  // Aligned with decisions_by_round; nullopt when the environment revealed
  // no outcome for that decision.
  std::vector<std::vector<std::optional<double>>> outcomes_by_round;
  std::size_t completed_events = 0;
  std::size_t skipped = 0;
};

/// Online scoring / batch training loop: each round scores a batch of
/// contexts with Thompson draws, logs decisions with propensities, folds in
/// rewards that have cleared the delay, regenerates incremental targets
/// from the accumulated log and batch-updates the posteriors.
LoopResult run_loop(BanditModel& model, BanditEnvironment& environment,
                    const LoopConfig& config);

}  // namespace cbandit
