#include "cbandit/baselines.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <stdexcept>

#include "cbandit/targets.hpp"

namespace cbandit {

LinearRegressor fit_ols(const std::vector<ContextVector>& xs,
                        const std::vector<double>& ys, double ridge_fallback) {
  if (xs.empty() || xs.size() != ys.size()) {
    throw std::invalid_argument("fit_ols: need matching nonempty xs and ys");
  }
  const Eigen::Index d = xs.front().size();
  const Eigen::Index n = static_cast<Eigen::Index>(xs.size());

  // Design with trailing intercept column, normal equations G b = r.
  Eigen::MatrixXd design(n, d + 1);
  Eigen::VectorXd target(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (xs[static_cast<std::size_t>(i)].size() != d) {
      throw std::invalid_argument("fit_ols: inconsistent feature dimensions");
    }
    design.row(i).head(d) = xs[static_cast<std::size_t>(i)].transpose();
    design(i, d) = 1.0;
    target[i] = ys[static_cast<std::size_t>(i)];
  }
  Eigen::MatrixXd gram = design.transpose() * design;
  Eigen::VectorXd rhs = design.transpose() * target;

  LinearRegressor model;
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  Eigen::VectorXd solution;
  if (llt.info() == Eigen::Success) {
    solution = llt.solve(rhs);
  }
  if (llt.info() != Eigen::Success || !solution.allFinite()) {
    Eigen::MatrixXd regularized =
        gram + ridge_fallback * Eigen::MatrixXd::Identity(d + 1, d + 1);
    Eigen::LLT<Eigen::MatrixXd> ridge_llt(regularized);
    if (ridge_llt.info() != Eigen::Success) {
      throw std::runtime_error("fit_ols: normal equations unsolvable");
    }
    solution = ridge_llt.solve(rhs);
    model.ridge_used = ridge_fallback;
  }
  model.weights = solution.head(d);
  model.intercept = solution[d];
  return model;
}

TrainingExample non_incremental_target(const LoggedEvent& event) {
  TrainingExample ex;
  ex.context = event.context;
  ex.arm = event.arm;
  ex.incremental_target = bias_correct(event.outcome, event.propensity);
  return ex;
}

double TwoModelCate::cate(const ContextVector& x, ArmId k) const {
  if (k < 1 || k > num_arms()) {
    throw std::out_of_range("two_model_cate: arm outside 1..K");
  }
  return treatment_models[static_cast<std::size_t>(k - 1)].predict(x) -
         control_model.predict(x);
}

TwoModelCate fit_two_model(const std::vector<LoggedEvent>& treatment_events,
                           const std::vector<LoggedEvent>& control_events,
                           int num_arms, double ridge_fallback) {
  if (treatment_events.empty() || control_events.empty()) {
    throw std::invalid_argument("fit_two_model: both cohorts must be nonempty");
  }
  std::vector<std::vector<ContextVector>> xs(static_cast<std::size_t>(num_arms));
  std::vector<std::vector<double>> ys(static_cast<std::size_t>(num_arms));
  for (const LoggedEvent& e : treatment_events) {
    if (e.arm < 1 || e.arm > num_arms) {
      throw std::invalid_argument("fit_two_model: treatment event with arm " +
                                  std::to_string(e.arm));
    }
    xs[static_cast<std::size_t>(e.arm - 1)].push_back(e.context);
    ys[static_cast<std::size_t>(e.arm - 1)].push_back(e.outcome);
  }

  TwoModelCate result;
  result.treatment_models.reserve(static_cast<std::size_t>(num_arms));
  for (int k = 0; k < num_arms; ++k) {
    if (xs[static_cast<std::size_t>(k)].empty()) {
      throw std::invalid_argument("fit_two_model: no events for arm " +
                                  std::to_string(k + 1));
    }
    result.treatment_models.push_back(fit_ols(xs[static_cast<std::size_t>(k)],
                                              ys[static_cast<std::size_t>(k)],
                                              ridge_fallback));
  }

  std::vector<ContextVector> cx;
  std::vector<double> cy;
  cx.reserve(control_events.size());
  cy.reserve(control_events.size());
  for (const LoggedEvent& e : control_events) {
    cx.push_back(e.context);
    cy.push_back(e.outcome);
  }
  result.control_model = fit_ols(cx, cy, ridge_fallback);
  return result;
}

double transformed_outcome(double y, int w, double e) {
  if (!(e > 0.0) || !(e < 1.0)) {
    throw std::invalid_argument("transformed_outcome: e must lie in (0,1)");
  }
  if (w != 0 && w != 1) {
    throw std::invalid_argument("transformed_outcome: w must be 0 or 1");
  }
  return y * static_cast<double>(w) / e -
         y * static_cast<double>(1 - w) / (1.0 - e);
}

double decomposed_cate(double p_conv_k, double p_conv_0, double ey_h1,
                       double ey_h0) {
  return (p_conv_k - p_conv_0) * (ey_h1 - ey_h0);
}

namespace {

void check_distribution(const std::vector<double>& p, const char* what) {
  double sum = 0.0;
  for (double v : p) {
    if (v < 0.0) throw std::invalid_argument(std::string(what) + ": negative probability");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument(std::string(what) + ": probabilities sum to " +
                                std::to_string(sum));
  }
}

}  // namespace

DiscreteJoint::DiscreteJoint(
    std::vector<double> x_prob, std::vector<std::vector<double>> w_given_x,
    std::vector<std::vector<double>> h1_given_xw, std::vector<double> y_values,
    std::vector<std::vector<std::vector<double>>> y_given_xh)
    : x_prob_(std::move(x_prob)),
      w_given_x_(std::move(w_given_x)),
      h1_given_xw_(std::move(h1_given_xw)),
      y_values_(std::move(y_values)),
      y_given_xh_(std::move(y_given_xh)) {
  if (x_prob_.empty()) throw std::invalid_argument("DiscreteJoint: empty X support");
  check_distribution(x_prob_, "Pr(X)");
  for (std::size_t x = 0; x < x_prob_.size(); ++x) {
    check_distribution(w_given_x_[x], "Pr(W|X)");
    for (double h1 : h1_given_xw_[x]) {
      if (h1 < 0.0 || h1 > 1.0) {
        throw std::invalid_argument("Pr(H=1|X,W) outside [0,1]");
      }
    }
    for (int h = 0; h < 2; ++h) {
      check_distribution(y_given_xh_[x][static_cast<std::size_t>(h)], "Pr(Y|X,H)");
    }
  }
}

double DiscreteJoint::w_prob(int x, int w) const {
  return w_given_x_[static_cast<std::size_t>(x)][static_cast<std::size_t>(w)];
}

double DiscreteJoint::conversion_prob(int x, int w) const {
  return h1_given_xw_[static_cast<std::size_t>(x)][static_cast<std::size_t>(w)];
}

double DiscreteJoint::metric_mean(int x, int h) const {
  const auto& py = y_given_xh_[static_cast<std::size_t>(x)][static_cast<std::size_t>(h)];
  double mean = 0.0;
  for (std::size_t i = 0; i < py.size(); ++i) mean += y_values_[i] * py[i];
  return mean;
}

double DiscreteJoint::direct_cate(int x, int k) const {
  if (x_prob_[static_cast<std::size_t>(x)] <= 0.0) {
    throw std::invalid_argument("direct_cate: Pr(X=x) is zero");
  }
  if (w_prob(x, k) <= 0.0 || w_prob(x, 0) <= 0.0) {
    throw std::invalid_argument("direct_cate: conditioning arm has zero probability");
  }
  auto conditional_mean = [this, x](int w) {
    double p1 = conversion_prob(x, w);
    return p1 * metric_mean(x, 1) + (1.0 - p1) * metric_mean(x, 0);
  };
  return conditional_mean(k) - conditional_mean(0);
}

double DiscreteJoint::expected_transformed_outcome(int x) const {
  if (num_arms() != 1) {
    throw std::invalid_argument(
        "expected_transformed_outcome needs a binary treatment (K=1)");
  }
  double e = w_prob(x, 1);
  if (!(e > 0.0) || !(e < 1.0)) {
    throw std::invalid_argument("expected_transformed_outcome: e outside (0,1)");
  }
  double total = 0.0;
  for (int w = 0; w <= 1; ++w) {
    double pw = w_prob(x, w);
    double p1 = conversion_prob(x, w);
    for (int h = 0; h < 2; ++h) {
      double ph = h == 1 ? p1 : 1.0 - p1;
      const auto& py =
          y_given_xh_[static_cast<std::size_t>(x)][static_cast<std::size_t>(h)];
      for (std::size_t yi = 0; yi < py.size(); ++yi) {
        total += pw * ph * py[yi] * transformed_outcome(y_values_[yi], w, e);
      }
    }
  }
  return total;
}

DiscreteJoint make_random_joint(std::mt19937_64& rng, int max_x, int max_arms,
                                int max_y) {
  std::uniform_int_distribution<int> nx_dist(1, max_x);
  std::uniform_int_distribution<int> k_dist(1, max_arms);
  std::uniform_int_distribution<int> ny_dist(2, max_y);
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  std::uniform_real_distribution<double> value(-5.0, 5.0);

  int nx = nx_dist(rng);
  int K = k_dist(rng);
  int ny = ny_dist(rng);

  auto normalized = [&](int n) {
    std::vector<double> p(static_cast<std::size_t>(n));
    double sum = 0.0;
    for (double& v : p) {
      v = unit(rng);
      sum += v;
    }
    for (double& v : p) v /= sum;
    return p;
  };

  std::vector<double> x_prob = normalized(nx);
  std::vector<std::vector<double>> w_given_x;
  std::vector<std::vector<double>> h1_given_xw;
  std::vector<std::vector<std::vector<double>>> y_given_xh;
  for (int x = 0; x < nx; ++x) {
    w_given_x.push_back(normalized(K + 1));
    std::vector<double> h1(static_cast<std::size_t>(K + 1));
    for (double& v : h1) v = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    h1_given_xw.push_back(std::move(h1));
    y_given_xh.push_back({normalized(ny), normalized(ny)});
  }
  std::vector<double> y_values(static_cast<std::size_t>(ny));
  for (double& v : y_values) v = value(rng);

  return DiscreteJoint(std::move(x_prob), std::move(w_given_x),
                       std::move(h1_given_xw), std::move(y_values),
                       std::move(y_given_xh));
}

}  // namespace cbandit
