#include "cbandit/targets.hpp"

#include <random>
#include <stdexcept>

#include "cbandit/rng.hpp"

namespace cbandit {

double bias_correct(double outcome, double propensity) {
  if (!(propensity > 0.0)) {
    throw std::invalid_argument("propensity must be positive, got " +
                                std::to_string(propensity));
  }
  return outcome / propensity;
}

double estimate_counterfactual(const std::vector<LoggedEvent>& neighbors) {
  if (neighbors.empty()) {
    throw std::invalid_argument("counterfactual estimate needs >= 1 neighbor");
  }
  double sum = 0.0;
  for (const LoggedEvent& e : neighbors) {
    sum += bias_correct(e.outcome, e.propensity);
  }
  return sum / static_cast<double>(neighbors.size());
}

double incremental_target(double corrected, double counterfactual) {
  return corrected - counterfactual;
}

GenerationResult generate_training_data(const Dataset& dataset,
                                        const GenerationConfig& config,
                                        const ContextIndex& index) {
  if (config.sample_size < 1) {
    throw std::invalid_argument("sample_size must be >= 1");
  }
  if (config.m_prime < 1) {
    throw std::invalid_argument("m_prime must be >= 1");
  }

  std::vector<std::size_t> eligible;
  eligible.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (config.include_control_arm || dataset.at(i).arm != kControlArm) {
      eligible.push_back(i);
    }
  }
  if (eligible.empty()) {
    throw std::runtime_error("no events eligible for target generation");
  }

  std::mt19937_64 rng = make_rng(config.rng_seed);
  std::uniform_int_distribution<std::size_t> pick(0, eligible.size() - 1);

  GenerationResult result;
  result.examples.reserve(config.sample_size);
  for (std::size_t m = 0; m < config.sample_size; ++m) {
    const LoggedEvent& event = dataset.at(eligible[pick(rng)]);
    double corrected = bias_correct(event.outcome, event.propensity);
    std::vector<LoggedEvent> neighbors;
    try {
      neighbors = query_counterfactual_neighbors(
          index, dataset, event.context, event.arm, config.m_prime,
          event.event_id);
    } catch (const EmptyPoolError&) {
      ++result.skipped;
      continue;
    }
    if (neighbors.empty()) {
      // Pool exists but the (approximate) search surfaced nothing.
      ++result.skipped;
      continue;
    }
    double counterfactual = estimate_counterfactual(neighbors);
    result.examples.push_back(
        {event.context, event.arm, incremental_target(corrected, counterfactual)});
  }
  return result;
}

}  // namespace cbandit
