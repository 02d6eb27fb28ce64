#pragma once

// Synthetic step-level retrieval bandit: a linear-reward environment on
// 4-dimensional uncertainty features with a retrieve/skip action, and the
// ridge-regularised UCB policy the regret theorem covers.

#include <array>
#include <cstdint>
#include <vector>

#include "speclab/core.hpp"

namespace speclab::grounding {

struct BanditEnv {
  std::array<double, 4> theta_true{0.0, 0.0, 0.0, 0.0};  // ||theta|| <= 1
  double noise_sigma = 0.25;                              // <= 0.5
  std::uint64_t horizon = 1000;

  void validate() const;
};

struct BanditTraceRow {
  std::uint64_t step = 0;
  bool retrieved = false;
  double reward = 0.0;
  double cumulative_regret = 0.0;
};

struct BanditRun {
  std::vector<double> cumulative_regret;  // per step
  double retrieve_fraction = 0.0;
  std::vector<BanditTraceRow> trace;
};

// One seeded episode. Features are uniform in [0,1]^3 with a trailing bias
// coordinate of 1. Retrieving yields theta^T phi + Gaussian noise; skipping
// yields 0. Regret is measured against the oracle policy (retrieve iff
// theta^T phi > 0) on expected rewards, so theta = 0 gives exactly zero
// regret. The ridge parameter is 1 and the exploration width is
// sqrt(ln(T/delta)/2); the UCB threshold is the skip reward.
BanditRun run_bandit_retrieval(const BanditEnv& env, Probability delta,
                               Seed seed, bool keep_trace = false);

}  // namespace speclab::grounding
