#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <vector>

#include "cbandit/targets.hpp"
#include "cbandit/types.hpp"

namespace cbandit {

/// Gaussian belief over one arm's linear reward model theta_k.
struct ArmPosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  double noise_variance = 1.0;
  std::size_t observation_count = 0;

  /// Lower-triangular Cholesky factor of the covariance; cached because the
  /// posterior is immutable between batch updates. Throws when the
  /// covariance is not positive definite.
  const Eigen::MatrixXd& cholesky() const;

 private:
  mutable Eigen::MatrixXd chol_;
  mutable bool chol_valid_ = false;
  friend class BanditModel;
  void invalidate() { chol_valid_ = false; }
};

/// One draw theta ~ N(mean, covariance).
Eigen::VectorXd sample_parameters(const ArmPosterior& arm, std::mt19937_64& rng);

/// Predicted incremental outcome theta^T x.
double score(const Eigen::VectorXd& theta, const ContextVector& context);

struct Decision {
  ContextVector context;
  ArmId chosen_arm = 1;
  std::vector<double> sampled_scores;  // index k-1 holds arm k's score
  double propensity_estimate = 1.0;
  std::int64_t decision_id = -1;
};

/// K-armed Thompson-sampling bandit over independent Bayesian linear
/// regression posteriors with known noise variance. Scoring reads an
/// immutable posterior snapshot; batch_update replaces it atomically.
class BanditModel {
 public:
  BanditModel(int dimension, int num_arms, double prior_variance,
              double noise_variance, std::uint64_t seed);

  int dimension() const { return dimension_; }
  int num_arms() const { return static_cast<int>(arms_.size()); }
  const ArmPosterior& arm(ArmId k) const;  // k in 1..K
  ArmPosterior& arm(ArmId k);

  /// Thompson step: one posterior draw per arm, play the argmax (ties go to
  /// the lowest arm index). The returned decision carries a Monte Carlo
  /// propensity estimate for the realized arm.
  Decision select_arm(const ContextVector& context);

  /// Monte Carlo estimate of Pr(arm == argmax over posterior draws),
  /// floored at 1/(n_samples+1) so logged propensities are never zero.
  /// Deterministic: the draw stream depends only on (n_samples, salt).
  double estimate_propensity(const ContextVector& context, ArmId arm,
                             std::size_t n_samples = kDefaultPropensitySamples) const;

  /// Conjugate update on the arms' incremental targets; arms without
  /// examples stay untouched. On numerical failure the model is unchanged.
  void batch_update(const std::vector<TrainingExample>& examples);

  /// Posterior-mean scores for all K arms (deterministic, used by offline
  /// evaluation).
  Eigen::VectorXd posterior_mean_scores(const ContextVector& context) const;

  std::mt19937_64& rng() { return rng_; }
  std::size_t propensity_samples() const { return propensity_samples_; }
  void set_propensity_samples(std::size_t n);

  /// Versioned snapshot with d, K, noise variance, per-arm mean/covariance
  /// and observation counts.
  void save(const std::filesystem::path& path) const;
  static BanditModel load(const std::filesystem::path& path);

  static constexpr std::size_t kDefaultPropensitySamples = 1024;

 private:
  int dimension_ = 0;
  std::vector<ArmPosterior> arms_;
  std::mt19937_64 rng_;
  std::uint64_t seed_ = 0;
  std::int64_t next_decision_id_ = 0;
  std::size_t propensity_samples_ = kDefaultPropensitySamples;
};

}  // namespace cbandit
