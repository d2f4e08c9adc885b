#include "cbandit/bandit.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "cbandit/rng.hpp"
#include "json.hpp"

namespace cbandit {

using nlohmann::json;

const Eigen::MatrixXd& ArmPosterior::cholesky() const {
  if (!chol_valid_) {
    Eigen::LLT<Eigen::MatrixXd> llt(covariance);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("arm covariance is not positive definite");
    }
    chol_ = llt.matrixL();
    chol_valid_ = true;
  }
  return chol_;
}

Eigen::VectorXd sample_parameters(const ArmPosterior& arm, std::mt19937_64& rng) {
  const Eigen::MatrixXd& L = arm.cholesky();
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(arm.mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
  return arm.mean + L * z;
}

double score(const Eigen::VectorXd& theta, const ContextVector& context) {
  if (theta.size() != context.size()) {
    throw std::invalid_argument("score: dimension mismatch");
  }
  return theta.dot(context);
}

BanditModel::BanditModel(int dimension, int num_arms, double prior_variance,
                         double noise_variance, std::uint64_t seed)
    : dimension_(dimension), rng_(make_rng(seed)), seed_(seed) {
  if (dimension < 1) throw std::invalid_argument("dimension must be >= 1");
  if (num_arms < 1) throw std::invalid_argument("num_arms must be >= 1");
  if (!(prior_variance > 0.0)) {
    throw std::invalid_argument("prior_variance must be positive");
  }
  if (!(noise_variance > 0.0)) {
    throw std::invalid_argument("noise_variance must be positive");
  }
  arms_.resize(static_cast<std::size_t>(num_arms));
  for (ArmPosterior& arm : arms_) {
    arm.mean = Eigen::VectorXd::Zero(dimension);
    arm.covariance =
        prior_variance * Eigen::MatrixXd::Identity(dimension, dimension);
    arm.noise_variance = noise_variance;
    arm.observation_count = 0;
  }
}

const ArmPosterior& BanditModel::arm(ArmId k) const {
  if (k < 1 || k > num_arms()) {
    throw std::out_of_range("arm index " + std::to_string(k) +
                            " outside 1.." + std::to_string(num_arms()));
  }
  return arms_[static_cast<std::size_t>(k - 1)];
}

ArmPosterior& BanditModel::arm(ArmId k) {
  return const_cast<ArmPosterior&>(std::as_const(*this).arm(k));
}

Decision BanditModel::select_arm(const ContextVector& context) {
  if (context.size() != dimension_) {
    throw std::invalid_argument("select_arm: dimension mismatch");
  }
  Decision d;
  d.context = context;
  d.sampled_scores.resize(arms_.size());
  int best = 0;
  for (std::size_t k = 0; k < arms_.size(); ++k) {
    Eigen::VectorXd theta = sample_parameters(arms_[k], rng_);
    d.sampled_scores[k] = score(theta, context);
    if (d.sampled_scores[k] > d.sampled_scores[static_cast<std::size_t>(best)]) {
      best = static_cast<int>(k);
    }
  }
  d.chosen_arm = best + 1;
  d.decision_id = next_decision_id_++;
  d.propensity_estimate =
      estimate_propensity(context, d.chosen_arm, propensity_samples_);
  return d;
}

double BanditModel::estimate_propensity(const ContextVector& context, ArmId arm,
                                        std::size_t n_samples) const {
  if (n_samples < 100) {
    throw std::invalid_argument("estimate_propensity needs n_samples >= 100");
  }
  if (arm < 1 || arm > num_arms()) {
    throw std::out_of_range("estimate_propensity: arm outside 1..K");
  }
  // theta^T x is scalar Gaussian with mean m_k and sd s_k, so the argmax
  // probability is estimated from K independent scalar draws per sample.
  const std::size_t K = arms_.size();
  std::vector<double> m(K), s(K);
  for (std::size_t k = 0; k < K; ++k) {
    m[k] = arms_[k].mean.dot(context);
    s[k] = (arms_[k].cholesky().transpose() * context).norm();
  }
  std::mt19937_64 rng = make_rng(derive_seed(0xC0FFEEull, n_samples));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::size_t hits = 0;
  const std::size_t target = static_cast<std::size_t>(arm - 1);
  for (std::size_t i = 0; i < n_samples; ++i) {
    std::size_t best = 0;
    double best_score = m[0] + s[0] * normal(rng);
    for (std::size_t k = 1; k < K; ++k) {
      double sc = m[k] + s[k] * normal(rng);
      if (sc > best_score) {
        best_score = sc;
        best = k;
      }
    }
    if (best == target) ++hits;
  }
  double p = static_cast<double>(hits) / static_cast<double>(n_samples);
  double floor = 1.0 / static_cast<double>(n_samples + 1);
  return std::max(p, floor);
}

void BanditModel::batch_update(const std::vector<TrainingExample>& examples) {
  for (const TrainingExample& ex : examples) {
    if (ex.context.size() != dimension_) {
      throw std::invalid_argument("batch_update: example dimension mismatch");
    }
    if (ex.arm < 1 || ex.arm > num_arms()) {
      throw std::invalid_argument("batch_update: example arm " +
                                  std::to_string(ex.arm) + " outside 1..K");
    }
  }

  // Accumulate sufficient statistics per arm.
  std::vector<Eigen::MatrixXd> xtx(arms_.size());
  std::vector<Eigen::VectorXd> xty(arms_.size());
  std::vector<std::size_t> counts(arms_.size(), 0);
  for (std::size_t k = 0; k < arms_.size(); ++k) {
    xtx[k] = Eigen::MatrixXd::Zero(dimension_, dimension_);
    xty[k] = Eigen::VectorXd::Zero(dimension_);
  }
  for (const TrainingExample& ex : examples) {
    std::size_t k = static_cast<std::size_t>(ex.arm - 1);
    xtx[k].noalias() += ex.context * ex.context.transpose();
    xty[k].noalias() += ex.context * ex.incremental_target;
    ++counts[k];
  }

  // Compute all new posteriors before touching the model, so a numerical
  // failure leaves it unchanged.
  std::vector<ArmPosterior> updated = arms_;
  for (std::size_t k = 0; k < arms_.size(); ++k) {
    if (counts[k] == 0) continue;
    const ArmPosterior& prior = arms_[k];
    double inv_noise = 1.0 / prior.noise_variance;

    Eigen::LLT<Eigen::MatrixXd> prior_llt(prior.covariance);
    if (prior_llt.info() != Eigen::Success) {
      throw std::runtime_error("batch_update: prior covariance not SPD");
    }
    Eigen::MatrixXd prior_precision =
        prior_llt.solve(Eigen::MatrixXd::Identity(dimension_, dimension_));

    Eigen::MatrixXd posterior_precision = prior_precision + inv_noise * xtx[k];
    Eigen::LLT<Eigen::MatrixXd> post_llt(posterior_precision);
    if (post_llt.info() != Eigen::Success) {
      throw std::runtime_error("batch_update: posterior precision not SPD");
    }
    Eigen::MatrixXd covariance =
        post_llt.solve(Eigen::MatrixXd::Identity(dimension_, dimension_));
    covariance = 0.5 * (covariance + covariance.transpose()).eval();

    Eigen::VectorXd mean =
        covariance * (prior_precision * prior.mean + inv_noise * xty[k]);
    if (!mean.allFinite() || !covariance.allFinite()) {
      throw std::runtime_error("batch_update: non-finite posterior");
    }

    updated[k].mean = std::move(mean);
    updated[k].covariance = std::move(covariance);
    updated[k].observation_count += counts[k];
    updated[k].invalidate();
  }
  arms_ = std::move(updated);
}

Eigen::VectorXd BanditModel::posterior_mean_scores(
    const ContextVector& context) const {
  if (context.size() != dimension_) {
    throw std::invalid_argument("posterior_mean_scores: dimension mismatch");
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(arms_.size()));
  for (std::size_t k = 0; k < arms_.size(); ++k) {
    out[static_cast<Eigen::Index>(k)] = arms_[k].mean.dot(context);
  }
  return out;
}

void BanditModel::set_propensity_samples(std::size_t n) {
  if (n < 100) {
    throw std::invalid_argument("propensity_samples must be >= 100");
  }
  propensity_samples_ = n;
}

void BanditModel::save(const std::filesystem::path& path) const {
  json j;
  j["format"] = "cbandit.model";
  j["version"] = 1;
  j["type"] = "bayes_linear";
  j["dimension"] = dimension_;
  j["num_arms"] = num_arms();
  j["seed"] = seed_;
  j["propensity_samples"] = propensity_samples_;
  json arms = json::array();
  for (const ArmPosterior& arm : arms_) {
    json a;
    a["noise_variance"] = arm.noise_variance;
    a["observation_count"] = arm.observation_count;
    a["mean"] = std::vector<double>(arm.mean.data(),
                                    arm.mean.data() + arm.mean.size());
    std::vector<double> cov;
    cov.reserve(static_cast<std::size_t>(arm.covariance.size()));
    for (Eigen::Index r = 0; r < arm.covariance.rows(); ++r) {
      for (Eigen::Index c = 0; c < arm.covariance.cols(); ++c) {
        cov.push_back(arm.covariance(r, c));
      }
    }
    a["covariance"] = cov;  // row-major
    arms.push_back(std::move(a));
  }
  j["arms"] = std::move(arms);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << j.dump(2) << '\n';
}

BanditModel BanditModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  json j = json::parse(in);
  if (j.value("format", "") != "cbandit.model" || j.value("version", 0) != 1) {
    throw std::runtime_error("not a model snapshot: " + path.string());
  }
  if (j.value("type", "") != "bayes_linear") {
    throw std::runtime_error("snapshot is not a bayes_linear model");
  }
  int d = j.at("dimension").get<int>();
  int num_arms = j.at("num_arms").get<int>();
  BanditModel model(d, num_arms, 1.0, 1.0, j.value("seed", 0ull));
  model.propensity_samples_ = j.value("propensity_samples",
                                      kDefaultPropensitySamples);
  const json& arms = j.at("arms");
  for (int k = 0; k < num_arms; ++k) {
    const json& a = arms.at(static_cast<std::size_t>(k));
    ArmPosterior& arm = model.arms_[static_cast<std::size_t>(k)];
    arm.noise_variance = a.at("noise_variance").get<double>();
    arm.observation_count = a.at("observation_count").get<std::size_t>();
    auto mean = a.at("mean").get<std::vector<double>>();
    auto cov = a.at("covariance").get<std::vector<double>>();
    if (mean.size() != static_cast<std::size_t>(d) ||
        cov.size() != static_cast<std::size_t>(d) * static_cast<std::size_t>(d)) {
      throw std::runtime_error("model snapshot has inconsistent shapes");
    }
    arm.mean = Eigen::Map<Eigen::VectorXd>(mean.data(), d);
    arm.covariance.resize(d, d);
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c < d; ++c) {
        arm.covariance(r, c) = cov[static_cast<std::size_t>(r) *
                                       static_cast<std::size_t>(d) +
                                   static_cast<std::size_t>(c)];
      }
    }
    arm.invalidate();
  }
  return model;
}

}  // namespace cbandit
