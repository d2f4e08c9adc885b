#include "cbandit/simulator.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "cbandit/bandit.hpp"
#include "cbandit/rng.hpp"
#include "json.hpp"

namespace cbandit {

using nlohmann::json;

namespace {

Eigen::VectorXd sparse_vec(int d, std::initializer_list<std::pair<int, double>> entries) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
  for (const auto& [i, w] : entries) v[i] = w;
  return v;
}

}  // namespace

SyntheticEnvironment default_environment(std::uint64_t seed) {
  SyntheticEnvironment env;
  env.dimension = 10;
  env.num_arms = 4;
  env.noise_sd = 1.0;
  env.seed = seed;
  env.organic_weights = sparse_vec(10, {{0, 1.2}, {1, 0.8}});
  env.organic_weights.tail(8).array() += 0.2;

  // Each arm persuades along its own pair of coordinates; subtracting the
  // across-arm mean makes the incremental weights sum to zero, so every
  // customer has a distinct best campaign rather than a shared one.
  std::vector<Eigen::VectorXd> base;
  for (int k = 0; k < 4; ++k) {
    base.push_back(sparse_vec(10, {{2 + 2 * k, 1.6}, {3 + 2 * k, 0.8}}));
  }
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(10);
  for (const auto& v : base) mean += v / 4.0;
  for (auto& v : base) env.incremental_weights.push_back(v - mean);
  return env;
}

SyntheticEnvironment confounded_environment(std::uint64_t seed) {
  SyntheticEnvironment env;
  env.dimension = 10;
  env.num_arms = 4;
  env.noise_sd = 1.0;
  env.seed = seed;
  // Strong organic signal: customers with high x0..x2 buy regardless.
  env.organic_weights = sparse_vec(10, {{0, 4.0}, {1, 4.0}, {2, 2.0}});
  // Arm 1 is the trap: weak incremental effect aligned with the organic
  // direction, so outcome-optimizing models chase it. Arms 2..4 persuade
  // along coordinates the organic signal never touches.
  env.incremental_weights = {
      sparse_vec(10, {{0, 0.9}, {1, 0.45}}),
      sparse_vec(10, {{4, 1.5}, {5, 0.9}}),
      sparse_vec(10, {{6, 1.5}, {7, 0.9}}),
      sparse_vec(10, {{8, 1.5}, {9, 0.9}}),
  };
  return env;
}

ContextVector sample_context(const SyntheticEnvironment& env,
                             std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ContextVector x(env.dimension);
  for (int i = 0; i < env.dimension; ++i) x[i] = unit(rng);
  return x;
}

double realize_outcome(const SyntheticEnvironment& env, const ContextVector& x,
                       ArmId arm, std::mt19937_64& rng) {
  if (arm < 0 || arm > env.num_arms) {
    throw std::invalid_argument("realize_outcome: arm outside {0..K}");
  }
  double y = env.organic_weights.dot(x);
  if (arm >= 1) {
    y += env.incremental_weights[static_cast<std::size_t>(arm - 1)].dot(x);
  }
  if (env.noise_sd > 0.0) {
    std::normal_distribution<double> noise(0.0, env.noise_sd);
    y += noise(rng);
  }
  return y;
}

double true_cate(const SyntheticEnvironment& env, const ContextVector& x,
                 ArmId arm) {
  if (arm < 1 || arm > env.num_arms) {
    throw std::invalid_argument("true_cate is defined for treatment arms 1..K");
  }
  return env.incremental_weights[static_cast<std::size_t>(arm - 1)].dot(x);
}

LoggingPolicy uniform_policy(int num_arms) {
  if (num_arms < 1) throw std::invalid_argument("uniform_policy: K must be >= 1");
  return [num_arms](const ContextVector&, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> pick(1, num_arms);
    return std::make_pair(pick(rng), 1.0 / static_cast<double>(num_arms));
  };
}

LoggingPolicy bandit_policy(BanditModel& model) {
  // Uses the model's own RNG stream; per-index streams only feed the
  // context and noise draws in that case.
  return [&model](const ContextVector& x, std::mt19937_64&) {
    Decision d = model.select_arm(x);
    return std::make_pair(d.chosen_arm, d.propensity_estimate);
  };
}

GeneratedLog generate_log(const SyntheticEnvironment& env,
                          const LoggingPolicy& policy, std::size_t n_events,
                          double holdout_fraction) {
  if (n_events < 1) throw std::invalid_argument("generate_log: n_events >= 1");
  if (holdout_fraction < 0.0 || holdout_fraction >= 1.0) {
    throw std::invalid_argument("generate_log: holdout_fraction in [0,1)");
  }
  const auto n_holdout = static_cast<std::size_t>(
      std::lround(static_cast<double>(n_events) * holdout_fraction));
  const std::size_t n_treatment = n_events - n_holdout;

  std::vector<LoggedEvent> treatment;
  std::vector<LoggedEvent> holdout;
  treatment.reserve(n_treatment);
  holdout.reserve(n_holdout);
  for (std::size_t i = 0; i < n_events; ++i) {
    std::mt19937_64 rng = make_rng(derive_seed(env.seed, i));
    LoggedEvent e;
    e.context = sample_context(env, rng);
    e.event_id = static_cast<EventId>(i);
    if (i < n_treatment) {
      auto [arm, propensity] = policy(e.context, rng);
      e.arm = arm;
      e.propensity = propensity;
      e.outcome = realize_outcome(env, e.context, arm, rng);
      treatment.push_back(std::move(e));
    } else {
      e.arm = kControlArm;
      e.propensity = 1.0;
      e.outcome = realize_outcome(env, e.context, kControlArm, rng);
      holdout.push_back(std::move(e));
    }
  }
  GeneratedLog log;
  log.treatment = Dataset(std::move(treatment), env.dimension, env.num_arms);
  log.holdout = Dataset(std::move(holdout), env.dimension, env.num_arms);
  return log;
}

void write_environment(const std::filesystem::path& path,
                       const SyntheticEnvironment& env) {
  json j;
  j["format"] = "cbandit.environment";
  j["version"] = 1;
  j["dimension"] = env.dimension;
  j["num_arms"] = env.num_arms;
  j["noise_sd"] = env.noise_sd;
  j["seed"] = env.seed;
  j["organic_weights"] = std::vector<double>(
      env.organic_weights.data(),
      env.organic_weights.data() + env.organic_weights.size());
  json deltas = json::array();
  for (const auto& delta : env.incremental_weights) {
    deltas.push_back(
        std::vector<double>(delta.data(), delta.data() + delta.size()));
  }
  j["incremental_weights"] = std::move(deltas);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << j.dump(2) << '\n';
}

SyntheticEnvironment read_environment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  json j = json::parse(in);
  if (j.value("format", "") != "cbandit.environment") {
    throw std::runtime_error("not an environment spec: " + path.string());
  }
  SyntheticEnvironment env;
  env.dimension = j.at("dimension").get<int>();
  env.num_arms = j.at("num_arms").get<int>();
  env.noise_sd = j.at("noise_sd").get<double>();
  env.seed = j.at("seed").get<std::uint64_t>();
  auto b = j.at("organic_weights").get<std::vector<double>>();
  env.organic_weights = Eigen::Map<Eigen::VectorXd>(b.data(),
                                                    static_cast<Eigen::Index>(b.size()));
  for (const auto& row : j.at("incremental_weights")) {
    auto delta = row.get<std::vector<double>>();
    env.incremental_weights.push_back(Eigen::Map<Eigen::VectorXd>(
        delta.data(), static_cast<Eigen::Index>(delta.size())));
  }
  if (static_cast<int>(env.incremental_weights.size()) != env.num_arms) {
    throw std::runtime_error("environment spec: wrong number of delta rows");
  }
  return env;
}

}  // namespace cbandit
