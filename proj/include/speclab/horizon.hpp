#pragma once

// Architectural reasoning-depth rules: horizon prediction, accuracy-decay
// bound, regime classification, CLC ratio, planning capacity, compositional
// ceiling, fine-tuning envelope, and the end-to-end design plan.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "speclab/core.hpp"

namespace speclab::horizon {

struct ArchProfile {
  std::uint32_t layers = 1;     // L
  std::uint32_t width = 3;      // d, must be >= 3 so sqrt(ln d) is meaningful
  double c_hat = 2.74;          // fitted proportionality constant

  void validate() const;
};

struct TaskProfile {
  double depth = 1.0;                // required reasoning hops
  Probability per_step_error{0.0};   // epsilon < 0.5
  std::uint32_t m_req = 1;           // compositional depth demanded
  std::uint32_t n_req = 1;           // input length demanded
  std::uint32_t n_train = 1;         // training input length, <= n_req
  Probability target_error{0.05};

  void validate() const;
};

enum class Regime { kChainOfThought, kKRedundantVerification, kToolDelegation };

enum class Supervision { kProcess, kOutcome };

enum class Strategy { kBestOfN, kBestOfNWithPRM, kBeam, kSingleChainVerified };

struct DesignPlan {
  double d_star = 0.0;
  Regime regime = Regime::kChainOfThought;
  std::uint32_t k_star = 1;
  std::uint64_t n_star = 0;
  double h_star = 0.0;  // nats
  Supervision supervision = Supervision::kOutcome;
  Strategy strategy = Strategy::kBestOfNWithPRM;
  double strategy_exponent = 0.0;
  bool advisory_only = false;  // set when regime is ToolDelegation
};

// d* = c_hat * ln(L) * sqrt(ln d), natural logarithms throughout.
double horizon_predict(const ArchProfile& arch);

// Pr[correct] <= exp(-c3 (delta - d*)^2 / (L^2 ln d)); 1 when delta <= d*.
Probability decay_bound(double delta, double d_star, std::uint32_t layers,
                        std::uint32_t width, double c3 = 1.0);

// Schematic decay curve exp(-(delta/d*)^2 ln 2); passes 1/2 at delta = d*.
Probability schematic_decay(double delta, double d_star);

// delta <= d*: CoT; d* < delta <= 2 d*: k-redundant; beyond: delegate.
// Boundaries are inclusive-left.
Regime regime_classify(double delta, double d_star);

struct ClcResult {
  double ratio = 0.0;
  bool failure_regime = false;  // ratio >= 1
};

// CLC = 2 m_req log2(n_req / n_train) / d*.
ClcResult clc_ratio(const TaskProfile& task, double d_star);

struct PlanningCapacity {
  double lower = 0.0;
  double upper = 0.0;
};

// Upper c_upper L^2 ln d / (ln s + ln a); lower c_lower L ln d / (ln s + ln a).
PlanningCapacity planning_capacity(const ArchProfile& arch, std::uint64_t states,
                                   std::uint64_t actions, double c_upper = 1.0,
                                   double c_lower = 1.0);

// Reference ceiling reported for (L=32, d=4096, s=73, a=12); recorded as
// comparison data, not derived from the formula with unit constants.
inline constexpr double kPlanningReferenceCeiling = 89.0;

// Acc <= 3/4 + 1/(2|Y|).
Probability compositional_ceiling(std::uint64_t answer_space);

// Acc_ft(d) <= Acc_base(d*) d*/d + c_env d*/d, clamped to 1. Requires
// d_test > d_star; within-horizon calls belong on the unrestricted path.
Probability finetune_envelope(double d_star, double d_test,
                              Probability acc_base_at_dstar,
                              double c_env = 0.0);

struct StrategyCandidate {
  Strategy label = Strategy::kBestOfNWithPRM;
  double exponent = 0.0;
};

struct DesignPlanConfig {
  Probability lambda{0.025};     // per-step cost for the stopping threshold
  Probability gamma_hat{0.3};    // spectral-gap estimate
  bool non_redundant = true;     // chain non-redundancy holds
  double c3 = 1.0;
  // Candidate inference strategies; the plan picks the largest exponent.
  // Defaults mirror a PRM-verified best-of-N against width-4 beam search.
  std::vector<StrategyCandidate> candidates;
};

// Steps 1-4 of the practitioner decision procedure: d*, regime, k*, n*, h*,
// supervision mode and inference strategy.
DesignPlan design_plan(const ArchProfile& arch, const TaskProfile& task,
                       const DesignPlanConfig& config = {});

// Published per-architecture reference rows: (name, L, d, tabulated d*_pred).
// The recomputed value c_hat ln L sqrt(ln d) disagrees with the tabulated one
// for the GPT-2 rows; both are kept and neither is corrected.
struct ArchReferenceRow {
  const char* model;
  std::uint32_t layers;
  std::uint32_t width;
  double tabulated_d_star;
};
const std::array<ArchReferenceRow, 12>& arch_reference_rows();

}  // namespace speclab::horizon
