#pragma once

#include <random>
#include <vector>

#include "cbandit/types.hpp"

namespace cbandit {

/// Linear model y ~ weights . x + intercept, least-squares fitted.
struct LinearRegressor {
  Eigen::VectorXd weights;
  double intercept = 0.0;
  // Regularizer actually applied; nonzero only after the rank-deficiency
  // fallback kicked in.
  double ridge_used = 0.0;

  double predict(const ContextVector& x) const {
    return weights.dot(x) + intercept;
  }
};

/// Ordinary least squares via normal equations with an intercept column.
/// Falls back to ridge (lambda = ridge_fallback) when the system is rank
/// deficient and records the regularizer in the result.
LinearRegressor fit_ols(const std::vector<ContextVector>& xs,
                        const std::vector<double>& ys,
                        double ridge_fallback = 1e-8);

/// IPS-corrected outcome with no counterfactual subtraction; the
/// non-incremental training target.
TrainingExample non_incremental_target(const LoggedEvent& event);

/// Two-model CATE: one treatment regressor per arm, one shared control
/// regressor fitted on non-treated customers.
struct TwoModelCate {
  std::vector<LinearRegressor> treatment_models;  // index k-1 holds arm k
  LinearRegressor control_model;

  int num_arms() const { return static_cast<int>(treatment_models.size()); }
  double cate(const ContextVector& x, ArmId k) const;
};

TwoModelCate fit_two_model(const std::vector<LoggedEvent>& treatment_events,
                           const std::vector<LoggedEvent>& control_events,
                           int num_arms, double ridge_fallback = 1e-8);

/// Transformed outcome for a binary treatment with propensity e in (0,1):
/// y*w/e - y*(1-w)/(1-e). Its conditional expectation is the CATE.
double transformed_outcome(double y, int w, double e);

/// Conversion-decomposition CATE: incremental conversion propensity times
/// the conditional business-metric difference.
double decomposed_cate(double p_conv_k, double p_conv_0, double ey_h1,
                       double ey_h0);

/// Finite joint distribution over (X, W, H, Y) with Y conditionally
/// independent of W given (H, X) by construction. Supports exhaustive
/// expectation computations used as oracles for the decomposition and the
/// transformed-outcome estimator.
class DiscreteJoint {
 public:
  DiscreteJoint(std::vector<double> x_prob,
                std::vector<std::vector<double>> w_given_x,
                std::vector<std::vector<double>> h1_given_xw,
                std::vector<double> y_values,
                std::vector<std::vector<std::vector<double>>> y_given_xh);

  int num_x() const { return static_cast<int>(x_prob_.size()); }
  int num_arms() const {
    return static_cast<int>(w_given_x_.front().size()) - 1;
  }

  double x_prob(int x) const { return x_prob_[static_cast<std::size_t>(x)]; }
  double w_prob(int x, int w) const;
  /// Pr(H=1 | X=x, W=w).
  double conversion_prob(int x, int w) const;
  /// E[Y | X=x, H=h]; W-independent by construction.
  double metric_mean(int x, int h) const;

  /// E[Y|X=x,W=k] - E[Y|X=x,W=0] by exhaustive enumeration. Throws when
  /// conditioning on a zero-probability event.
  double direct_cate(int x, int k) const;

  /// Exact expectation of the transformed outcome given X=x; requires a
  /// binary treatment (K == 1) with e(x) in (0,1).
  double expected_transformed_outcome(int x) const;

 private:
  std::vector<double> x_prob_;
  std::vector<std::vector<double>> w_given_x_;        // [x][w], w in 0..K
  std::vector<std::vector<double>> h1_given_xw_;      // [x][w] -> Pr(H=1)
  std::vector<double> y_values_;
  std::vector<std::vector<std::vector<double>>> y_given_xh_;  // [x][h][y]
};

/// Random valid joint for property tests: small enumerated supports,
/// normalized conditionals, positive arm probabilities.
DiscreteJoint make_random_joint(std::mt19937_64& rng, int max_x = 4,
                                int max_arms = 3, int max_y = 4);

}  // namespace cbandit
