#include "speclab/bandit.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

#include "speclab/rng.hpp"

namespace speclab::grounding {

void BanditEnv::validate() const {
  double norm_sq = 0.0;
  for (double v : theta_true) norm_sq += v * v;
  if (norm_sq > 1.0 + 1e-12)
    throw std::invalid_argument("BanditEnv: ||theta|| <= 1");
  if (!(noise_sigma >= 0.0 && noise_sigma <= 0.5))
    throw std::invalid_argument("BanditEnv: sigma in [0, 0.5]");
  if (horizon == 0) throw std::invalid_argument("BanditEnv: horizon >= 1");
}

BanditRun run_bandit_retrieval(const BanditEnv& env, Probability delta,
                               Seed seed, bool keep_trace) {
  env.validate();
  if (!(delta.value() > 0.0 && delta.value() < 1.0))
    throw std::invalid_argument("run_bandit_retrieval: delta in (0,1)");

  constexpr int kDim = 4;
  const double horizon = static_cast<double>(env.horizon);
  const double explore =
      std::sqrt(std::log(horizon / delta.value()) / 2.0);

  Eigen::Matrix4d gram = Eigen::Matrix4d::Identity();  // ridge lambda = 1
  Eigen::Vector4d moment = Eigen::Vector4d::Zero();

  Rng rng(seed);
  BanditRun run;
  run.cumulative_regret.reserve(env.horizon);
  if (keep_trace) run.trace.reserve(env.horizon);

  double regret = 0.0;
  std::uint64_t retrievals = 0;
  const Eigen::Vector4d theta_true(env.theta_true[0], env.theta_true[1],
                                   env.theta_true[2], env.theta_true[3]);

  for (std::uint64_t t = 0; t < env.horizon; ++t) {
    Eigen::Vector4d phi;
    for (int i = 0; i < kDim - 1; ++i) phi(i) = rng.uniform();
    phi(kDim - 1) = 1.0;

    const Eigen::Matrix4d gram_inv = gram.inverse();
    const Eigen::Vector4d theta_hat = gram_inv * moment;
    const double ucb = theta_hat.dot(phi) +
                       explore * std::sqrt(phi.dot(gram_inv * phi));

    const double mean_reward = theta_true.dot(phi);
    const bool retrieve = ucb >= 0.0;  // skip pays exactly 0
    const double oracle = std::max(mean_reward, 0.0);
    regret += oracle - (retrieve ? mean_reward : 0.0);

    double reward = 0.0;
    if (retrieve) {
      reward = mean_reward + rng.normal(0.0, env.noise_sigma);
      gram += phi * phi.transpose();
      moment += reward * phi;
      ++retrievals;
    }
    run.cumulative_regret.push_back(regret);
    if (keep_trace)
      run.trace.push_back({t, retrieve, reward, regret});
  }
  run.retrieve_fraction =
      static_cast<double>(retrievals) / static_cast<double>(env.horizon);
  return run;
}

}  // namespace speclab::grounding
