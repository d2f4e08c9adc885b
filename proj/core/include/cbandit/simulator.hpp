#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <utility>
#include <vector>

#include "cbandit/types.hpp"

namespace cbandit {

class BanditModel;

/// Synthetic marketing environment with a known separation between organic
/// behavior and per-campaign incremental effects:
///   Y(x, k) = b.x + delta_k.x * [k >= 1] + eps,  eps ~ N(0, noise_sd^2)
/// so the ground-truth CATE of arm k at x is delta_k.x.
struct SyntheticEnvironment {
  int dimension = 0;
  int num_arms = 0;
  Eigen::VectorXd organic_weights;                  // b
  std::vector<Eigen::VectorXd> incremental_weights; // delta_1..delta_K
  double noise_sd = 1.0;
  std::uint64_t seed = 0;
};

/// Default scenario: d=10, K=4, noise_sd=1, per-arm persuadable directions
/// with zero-sum incremental weights plus a modest organic signal.
SyntheticEnvironment default_environment(std::uint64_t seed = 0);

/// Confounded scenario: the organic signal is strong and aligned with the
/// affinity direction of the weakest campaign, so a model chasing raw
/// outcomes is drawn to customers who would have converted anyway while the
/// incremental weights point at different, persuadable customers.
SyntheticEnvironment confounded_environment(std::uint64_t seed = 0);

ContextVector sample_context(const SyntheticEnvironment& env,
                             std::mt19937_64& rng);

double realize_outcome(const SyntheticEnvironment& env, const ContextVector& x,
                       ArmId arm, std::mt19937_64& rng);

/// delta_arm . x for arm >= 1; arm 0 has no treatment effect by definition
/// and is an error.
double true_cate(const SyntheticEnvironment& env, const ContextVector& x,
                 ArmId arm);

/// Logging policy: maps a context to (arm, logged propensity).
using LoggingPolicy =
    std::function<std::pair<ArmId, double>(const ContextVector&, std::mt19937_64&)>;

LoggingPolicy uniform_policy(int num_arms);
LoggingPolicy bandit_policy(BanditModel& model);

struct GeneratedLog {
  Dataset treatment;
  Dataset holdout;
};

/// Generates n_events events with per-index derived RNG streams: the first
/// (1 - holdout_fraction) share receives arms from the policy with true
/// logged propensities, the rest is held out (arm 0, propensity 1, organic
/// outcomes only).
GeneratedLog generate_log(const SyntheticEnvironment& env,
                          const LoggingPolicy& policy, std::size_t n_events,
                          double holdout_fraction);

/// Environment spec file: a single JSON object with d, K, b, delta rows,
/// noise_sd and seed.
void write_environment(const std::filesystem::path& path,
                       const SyntheticEnvironment& env);
SyntheticEnvironment read_environment(const std::filesystem::path& path);

}  // namespace cbandit
