#pragma once

// Reliability toolkit for multi-step reasoning chains: error-propagation
// bounds, k-redundant verification, cost-optimal verification level, the
// i.i.d. step simulator, supervision separation, test-time scaling laws and
// optimal compute allocation.

#include <cstdint>
#include <utility>
#include <vector>

#include "speclab/core.hpp"

namespace speclab::chain {

// Pr(error) <= 1 - (1-eps)^n. Tight under i.i.d. steps.
Probability chain_error_bound(std::uint64_t n, Probability eps);

// Largest n with chain_error_bound(n, eps) <= delta:
// n* = floor(ln(1-delta)/ln(1-eps)).
std::uint64_t safe_length(Probability eps, Probability delta);

// max(0, 1 - (1-eps/2)^n - 1/(n ln|Y|)).
Probability fano_lower_bound(std::uint64_t n, Probability eps,
                             std::uint64_t answer_space);

// C(k+1, ceil((k+1)/2)) * n * eps^ceil((k+1)/2), clamped to 1.
ClampedBound kredundant_bound(std::uint64_t n, Probability eps,
                              std::uint32_t k);

// Largest n with kredundant_bound(n, eps, k) <= delta.
std::uint64_t kredundant_safe_length(Probability eps, Probability delta,
                                     std::uint32_t k);

// k* = ceil(2 ln(n/delta) / ln(1/eps) - 1), clamped to at least 1.
std::uint32_t optimal_k(std::uint64_t n, Probability delta, Probability eps);

// Per-step majority-vote error under k-redundancy; exact via binom_tail.
double majority_step_error(Probability eps, std::uint32_t k);

// Exact chain error when each step uses (k+1)-candidate majority voting:
// 1 - (1 - p_maj)^n. The independent oracle the union bound is checked
// against.
double exact_majority_chain_error(std::uint64_t n, Probability eps,
                                  std::uint32_t k);

// Monte Carlo of the synthetic protocol: n i.i.d. Bernoulli steps, k = 0 for
// no redundancy, k >= 2 for (k+1)-candidate majority voting per step (k = 1
// is rejected). Deterministic under the master seed for any thread count.
SimReport simulate_chain(std::uint64_t n, Probability eps, std::uint32_t k,
                         std::uint64_t trials, Seed seed, unsigned threads = 1);

// h* = (lambda / gamma) ln(1 / lambda).
double entropy_threshold(Probability lambda, Probability gamma);

// Process-vs-outcome sample-complexity ratio n/ln n, shrunk by (1-2 eta)^2
// under symmetric step-label noise eta.
double supervision_ratio(std::uint64_t n, Probability label_noise);

// Process supervision frees budget by Theta(n / (ln n)^2); the exact unit-
// constant expression (n^2 / ln n) / (n ln n).
double training_fraction_ratio(std::uint64_t n);

struct StrategySpec {
  enum class Kind {
    kBestOfNPerfect,
    kBestOfNImperfect,
    kBeam,
    kSingleChainVerified,
  };
  Kind kind = Kind::kBestOfNPerfect;
  double verifier_error = 0.0;  // BestOfNImperfect
  std::uint32_t beam_width = 2;
  double per_step_error = 0.0;  // SingleChainVerified
  double info_per_step = 1.0;   // SingleChainVerified

  static StrategySpec best_of_n_perfect();
  static StrategySpec best_of_n_imperfect(Probability verifier_error);
  static StrategySpec beam(std::uint32_t width);
  static StrategySpec single_chain_verified(Probability eps,
                                            double info_per_step);
};

struct ScalingExponent {
  double alpha = 0.0;
  // Beam width 2 makes the generic log_b(b-1) formula collapse to 0; the
  // result is returned with this flag instead of -inf.
  bool degenerate_branching = false;
};

// alpha by strategy: best-of-N 1; imperfect verifier 1 - eps_v;
// beam(b) log_b(b-1); single verified chain 1/(1 + eps/I_step).
ScalingExponent scaling_exponent(const StrategySpec& strategy);

// 1 - exp(-c C^alpha).
Probability success_curve(double compute, double c, double alpha);

struct ScalingFit {
  double c = 0.0;
  double alpha = 0.0;
  double r_squared = 0.0;
};

// Deterministic NLS fit of (C, success) points to 1 - exp(-c C^alpha):
// closed-form log-domain initialisation, coarse grid, coordinate refinement.
ScalingFit fit_scaling(const std::vector<std::pair<double, double>>& points);

struct AllocationResult {
  double train_tokens = 0.0;      // T*
  double inference_compute = 0.0; // C*
  double verifier_error = 0.0;    // eps_v(T*)
};

// Solves T/C = (c_infer/c_train) d_cot n ln C / (C^(1-eps_v) c) under the
// budget c_train T + c_infer C = B with eps_v(T) = d_cot n ln T / T, by
// bisection on T. Throws when no interior solution exists.
AllocationResult allocation_optimum(double budget, double c_train,
                                    double c_infer, std::uint64_t n,
                                    double d_cot, double c);

}  // namespace speclab::chain
