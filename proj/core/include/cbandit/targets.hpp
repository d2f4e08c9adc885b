#pragma once

#include <cstdint>
#include <vector>

#include "cbandit/matching.hpp"
#include "cbandit/types.hpp"

namespace cbandit {

enum class MatchMode { exact, graph };

struct GenerationConfig {
  std::size_t sample_size = 0;  // M, number of examples to generate
  std::size_t m_prime = 10;     // M', matched records per example
  std::uint64_t rng_seed = 0;
  MatchMode matching_mode = MatchMode::exact;
  // Arm-0 records are never sampled as generation inputs unless enabled;
  // they always remain eligible as counterfactual neighbors.
  bool include_control_arm = false;
};

/// Inverse-propensity correction: outcome / propensity.
double bias_correct(double outcome, double propensity);

/// Mean of the bias-corrected outcomes of the matched records. The divisor
/// is the actual neighbor count, which deflates nothing when the eligible
/// pool is smaller than M'.
double estimate_counterfactual(const std::vector<LoggedEvent>& neighbors);

/// Signed incremental target: corrected - counterfactual.
double incremental_target(double corrected, double counterfactual);

struct GenerationResult {
  std::vector<TrainingExample> examples;
  std::size_t skipped = 0;  // sampled events with an empty counterfactual pool
};

/// Samples M events with replacement (deterministic under rng_seed), bias
/// corrects each outcome, subtracts the matched-counterfactual estimate and
/// emits (context, arm, target) examples. Events with an empty eligible pool
/// are counted and skipped, never fatal.
GenerationResult generate_training_data(const Dataset& dataset,
                                        const GenerationConfig& config,
                                        const ContextIndex& index);

}  // namespace cbandit
