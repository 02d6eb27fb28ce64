#pragma once

// Shared numeric primitives and the uniform verdict/report records used by
// every other module.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

#include "speclab/rng.hpp"

namespace speclab {

// A real in [0,1]. Construction outside the range throws so that formula
// misuse surfaces immediately; bound-style operations that legitimately
// exceed 1 clamp explicitly and say so (see clamp_to_unit).
class Probability {
 public:
  Probability() = default;
  Probability(double v) : value_(v) {  // NOLINT: implicit by design
    if (!(v >= 0.0 && v <= 1.0))
      throw std::domain_error("Probability outside [0,1]: " +
                              std::to_string(v));
  }
  double value() const { return value_; }
  operator double() const { return value_; }

 private:
  double value_ = 0.0;
};

// Clamp for bound formulas whose raw value may exceed 1 (or dip below 0).
// Returns the clamped probability and whether clamping made it vacuous.
struct ClampedBound {
  Probability value;
  bool vacuous = false;  // raw value was >= 1 before clamping
};

inline ClampedBound clamp_to_unit(double raw) {
  if (raw >= 1.0) return {Probability(1.0), true};
  if (raw <= 0.0) return {Probability(0.0), false};
  return {Probability(raw), false};
}

enum class CostUnits {
  kProbability,
  kSampleCount,
  kWelfareFraction,
  kPercentagePoints,
  kMultiplier,
};

// Prescribed actions, one per catalogue row family.
enum class Rule {
  kDelegateToTools,
  kDelegateBeyondHorizon,
  kEntropyStopAndVerify,
  kInvestProcessSupervision,
  kCapAdapterRank,
  kBudgetQuadraticPreferencePairs,
  kRetainRealDataFraction,
  kRetrainBeyondEditCapacity,
  kUseStageLevelMetrics,
  kClassifyConflictsBeforeRouting,
  kAdaptiveRetrievalPolicy,
  kInterventionalAttribution,
  kCertifiedSubgraphVoting,
  kUseOspMechanism,
  kMinimiseNonlinearOps,
  kDeployMechanismAndVerification,
};

struct SpecVerdict {
  int spec_id = 0;  // 1..16
  double boundary_value = 0.0;
  bool satisfied = false;
  double violation_cost = 0.0;
  CostUnits cost_units = CostUnits::kProbability;
  Rule rule = Rule::kDelegateToTools;
};

// Seeded Monte Carlo result. When the estimate is a proportion the interval
// is the Wilson 95% interval.
struct SimReport {
  double estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::uint64_t trials = 0;
  Seed master_seed{};
};

// Upper tail P[X >= min_successes] for X ~ Binomial(trials, p).
// Exact oracle for majority-vote error; stable log-space summation.
double binom_tail(std::uint64_t trials, std::uint64_t min_successes,
                  Probability p);

// Wilson score interval for a binomial proportion.
std::pair<Probability, Probability> wilson_interval(std::uint64_t successes,
                                                    std::uint64_t trials,
                                                    Probability confidence);

SimReport make_proportion_report(std::uint64_t successes, std::uint64_t trials,
                                 Seed master_seed);

// Inverse standard normal CDF (Acklam's rational approximation, refined by
// one Halley step; good to ~1e-15 over (0,1)).
double inverse_normal_cdf(double p);

}  // namespace speclab
