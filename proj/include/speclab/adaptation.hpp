#pragma once

// Adapter-scale generalisation certificates, preference-misspecification
// regimes with an adversarial-construction simulator, Gaussian model-collapse
// dynamics, knowledge-edit capacity and the population-coverage gap bound.

#include <cstdint>
#include <vector>

#include "speclab/core.hpp"

namespace speclab::adaptation {

struct LoraConfig {
  std::uint64_t adapted_matrices = 1;  // m
  std::uint64_t rank = 1;              // r
  std::uint64_t d = 1;
  std::uint64_t k = 1;
  std::uint64_t documents = 1;         // N
  double sigma_prior = 1.0;            // sigma_P
  double sigma_posterior = 1.0;        // sigma_Q
  double mean_norm_sq = 0.0;           // ||phi_hat||^2
  Probability delta{0.05};
  double loss_range = 1.0;             // C

  void validate() const;
};

// q = m r (d + k).
std::uint64_t lora_effective_params(const LoraConfig& cfg);

// KL(Q||P) between isotropic Gaussians in dimension q:
// 1/2 [ q sQ^2/sP^2 + ||phi||^2/sP^2 - q + q ln(sP^2/sQ^2) ].
double lora_kl(const LoraConfig& cfg);

struct LoraBound {
  double bound = 0.0;
  double mc_correction = 0.0;
  double kl = 0.0;
  bool vacuous = false;  // bound >= 1 under the caller's normalisation
};

// bound = empirical_loss + Delta_MC + sqrt((KL + ln(2 sqrt(N)/delta))/(2N)),
// Delta_MC = C^2 sQ^2 sqrt(2 k_eff ln(2 k_eff/delta_mc) / M). Bounds are
// returned unnormalised; divide by the caller's normaliser (e.g. ln V)
// before reading the vacuous flag against 1.
LoraBound lora_bound(const LoraConfig& cfg, double empirical_loss,
                     Probability delta_mc, std::uint64_t mc_samples,
                     std::uint64_t k_eff, double normaliser = 1.0);

// r < N / (c0 (d+k) ln N). The default c0 is calibrated so that
// (N = 52000, d+k = 12288) gives a ceiling of exactly 32.
double rank_ceiling(std::uint64_t d, std::uint64_t k, std::uint64_t documents,
                    double c0 = 0.0);
double rank_ceiling_default_c0();

struct PrefProblem {
  std::uint32_t n_items = 2;
  double gap = 0.1;              // Delta, adjacent score gap
  Probability gamma{0.0};        // misspecification level, < 0.5
  Probability target_error{1.0 / 3.0};

  void validate() const;
};

enum class PrefRegime { kWellSpecified, kMisspecified };

struct PrefRegimeResult {
  PrefRegime regime = PrefRegime::kWellSpecified;
  double gamma_star = 0.0;  // Delta / n
  double budget = 0.0;      // c n ln n / Delta^2 below, c n^2 ln n / gamma^2 above
};

PrefRegimeResult pref_regime(const PrefProblem& p, double c = 1.0);

enum class AlignmentAdvice { kEquivalent, kPreferRLHF, kComparableDegradation };

// gamma = 0: Equivalent. gamma > 0 and reward width W >= C1 n / gamma:
// PreferRLHF; otherwise both methods degrade comparably. The default C1 is
// calibrated against the published width-1024 / width-256 contrast.
AlignmentAdvice dpo_rlhf_advice(Probability gamma, std::uint64_t n,
                                std::uint64_t reward_width, double c1 = 0.2);

struct PreferenceSimResult {
  double median_samples = 0.0;
  double iqr = 0.0;
  std::uint64_t censored_trials = 0;  // hit the sample cap
  std::uint64_t trials = 0;
  Seed master_seed{};
};

// Sample complexity of ordering the target adjacent (middle) pair by Borda
// win-count under uniform pair sampling. Comparisons follow
// (1-gamma) sigma(r_i - r_j) + gamma q_ij. Adversarial q pins every
// non-target pair at 1/2 (clipped to [0,1]); benign q is uniform 1/2 noise.
// Per trial, the reported count is the first sample size on a geometric
// schedule at which the pair is ordered correctly on three consecutive
// levels.
PreferenceSimResult simulate_preference(const PrefProblem& p, bool adversarial,
                                        std::uint64_t trials, Seed seed,
                                        unsigned threads = 1,
                                        std::uint64_t sample_cap = 16'000'000);

enum class CollapseMode { kReplacement, kAccumulation };

struct CollapseConfig {
  std::uint32_t dim = 8;
  double d_eff = 8.0;
  std::uint32_t n_per_gen = 500;
  std::uint32_t generations = 100;  // T
  CollapseMode mode = CollapseMode::kReplacement;
  Probability rho{0.0};  // real-data fraction; required > 0 in Accumulation
  std::uint32_t n0 = 500;

  void validate() const;
};

// E[TV] >= 1 - exp(-T^2 d_eff / (128 pi n_min)).
Probability collapse_lower_bound(std::uint64_t generations, double d_eff,
                                 std::uint64_t n_min);

// sup_T E[TV] <= c3 d_eff pi^2 / (6 rho n0). c3 is calibrated against the
// Gaussian simulator at desk scale (see tests), default 0.6.
double accumulation_ceiling(double d_eff, Probability rho, std::uint64_t n0,
                            double c3 = 0.6);

// Categorical / autoregressive collapse floor:
// 1 - exp(-c2 T^2 avg_entropy seq_len / (n_min ln vocab)); seq_len = 1 is
// the plain categorical case.
Probability ar_collapse_bound(std::uint64_t generations, double avg_entropy,
                              std::uint64_t seq_len, std::uint64_t n_min,
                              std::uint64_t vocab, double c2 = 1.0);

struct CollapsePoint {
  std::uint32_t generation = 0;
  double kl_to_p0 = 0.0;
};

// Iterative refitting of a Gaussian by maximum likelihood on its own samples
// (Replacement) or on a rho-mixture with real data (Accumulation); closed
// form KL against the N(0, I) population each generation.
std::vector<CollapsePoint> simulate_collapse(const CollapseConfig& cfg,
                                             Seed seed);

struct EditConfig {
  std::uint64_t d = 4096;
  double alpha = 2.0;      // superposition ratio, > 1
  double c = 1.0;          // key-correlation constant
  double eta_mag = 1.0;    // mean per-edit magnitude
  double tau = 0.1;        // locality tolerance
  std::uint32_t rank = 1;
  std::uint32_t layers_edited = 1;

  void validate() const;
};

// Expected off-target perturbation per edit: (c/sqrt(d)) ||v'-v|| (1 - 1/alpha).
double edit_interference(const EditConfig& cfg, double value_shift_norm);

struct EditCapacity {
  double k_star = 0.0;            // tau sqrt(d) / (c eta (1 - 1/alpha))
  double k_star_rank_r = 0.0;     // r K*_1 (leading term)
  double k_star_multilayer = 0.0; // layers_edited K*_1
};

EditCapacity edit_capacity(const EditConfig& cfg);

struct EvoprefGap {
  double total = 0.0;
  double sample_term = 0.0;      // c1 sqrt(gamma ln(1/delta) / n)
  double population_term = 0.0;  // c2 / sqrt(mu)
  double convergence_term = 0.0; // c3 exp(-lambda G)
};

struct EvoprefConstants {
  double c1 = 1.0;
  double c2 = 0.73;  // calibrated to the published (mu = 32, gap ~ 0.13) pair
  double c3 = 1.0;
  double lambda_conv = 0.05;
};

EvoprefGap evopref_gap(Probability gamma, std::uint64_t n, std::uint64_t mu,
                       std::uint64_t generations, Probability delta,
                       const EvoprefConstants& constants = {});

}  // namespace speclab::adaptation
