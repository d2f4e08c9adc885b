#include "cbandit/loop.hpp"

#include <memory>

#include "cbandit/matching.hpp"
#include "cbandit/rng.hpp"

namespace cbandit {

LogReplayEnvironment::LogReplayEnvironment(const Dataset& dataset)
    : dataset_(dataset) {
  if (dataset.empty()) {
    throw std::invalid_argument("cannot replay an empty log");
  }
}

ContextVector LogReplayEnvironment::next_context() {
  last_served_ = cursor_;
  const LoggedEvent& e = dataset_.at(cursor_);
  cursor_ = (cursor_ + 1) % dataset_.size();
  return e.context;
}

std::optional<double> LogReplayEnvironment::outcome(const ContextVector&,
                                                    ArmId arm) {
  const LoggedEvent& e = dataset_.at(last_served_);
  if (e.arm != arm) return std::nullopt;
  return e.outcome;
}

LoopResult run_loop(BanditModel& model, BanditEnvironment& environment,
                    const LoopConfig& config) {
  LoopResult result;
  result.decisions_by_round.resize(config.rounds);
  result.outcomes_by_round.resize(config.rounds);

  struct PendingEvent {
    LoggedEvent event;
    std::size_t available_at;
  };
  std::vector<PendingEvent> pending;
  std::vector<LoggedEvent> completed;

  for (std::size_t t = 1; t <= config.rounds; ++t) {
    auto& decisions = result.decisions_by_round[t - 1];
    auto& outcomes = result.outcomes_by_round[t - 1];
    decisions.reserve(config.contexts_per_round);
    outcomes.reserve(config.contexts_per_round);

    // Online scoring.
    for (std::size_t m = 0; m < config.contexts_per_round; ++m) {
      ContextVector x = environment.next_context();
      Decision d = model.select_arm(x);
      std::optional<double> y = environment.outcome(x, d.chosen_arm);
      if (y) {
        LoggedEvent e;
        e.context = d.context;
        e.arm = d.chosen_arm;
        e.propensity = d.propensity_estimate;
        e.outcome = *y;
        e.event_id = d.decision_id;
        pending.push_back({std::move(e), t + config.reward_delay});
      }
      decisions.push_back(std::move(d));
      outcomes.push_back(y);
    }

    // Delayed reward reception.
    std::erase_if(pending, [&](PendingEvent& p) {
      if (p.available_at <= t) {
        completed.push_back(std::move(p.event));
        return true;
      }
      return false;
    });

    // Batch training on the accumulated log.
    if (!completed.empty()) {
      Dataset log(completed, model.dimension(), model.num_arms());
      GenerationConfig gen;
      gen.sample_size = std::min(config.samples_per_round, log.size());
      gen.m_prime = config.m_prime;
      gen.matching_mode = config.matching_mode;
      gen.rng_seed = derive_seed(config.seed, t);
      std::unique_ptr<ContextIndex> index;
      if (config.matching_mode == MatchMode::graph) {
        HnswParams params;
        params.seed = derive_seed(config.seed, t ^ 0xA5A5A5A5ull);
        index = std::make_unique<HnswIndex>(log, params);
      } else {
        index = std::make_unique<ExactIndex>(log);
      }
      GenerationResult gen_result = generate_training_data(log, gen, *index);
      result.skipped += gen_result.skipped;
      model.batch_update(gen_result.examples);
    }
  }

  result.completed_events = completed.size();
  return result;
}

}  // namespace cbandit
