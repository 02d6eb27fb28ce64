#pragma once

// Pipeline-evaluation and grounding-defence calculators: metric counts,
// conflict routing, counterfactual attribution, and the certified vote
// radius.

#include <cstdint>

#include "speclab/core.hpp"

namespace speclab::grounding {

struct MetricRequirements {
  std::uint32_t min_metrics = 1;
  std::uint32_t ambiguity_dim = 0;
  double ambiguity_count_order = 1.0;  // delta^{-(k-1)}
};

// A k-stage pipeline needs k independent metrics; a single score leaves a
// (k-1)-dimensional ambiguity set with ~delta^{-(k-1)} indistinguishable
// diagnoses at resolution delta.
MetricRequirements metric_requirements(std::uint32_t k_stages,
                                       Probability resolution);

enum class ConflictType { kTemporal, kNumerical, kEntity, kSemantic };

struct ConflictInstance {
  double i_meta = 0.0;   // metadata mutual information, nats
  double h_claim = 1.0;  // claim entropy, nats

  void validate() const;
};

enum class Route { kShallow, kDeep };

// Shallow iff I_meta >= H(c) / 2 (inclusive).
Route route_conflict(const ConflictInstance& c);

struct RoutingCost {
  double accuracy_penalty_pp = 0.0;
  double compute_waste_fraction = 0.0;
};

// Misrouting prices: deep handled shallow loses 9.2 pp of accuracy; shallow
// handled deep wastes 94% of the compute.
RoutingCost routing_cost(Route routed, Route true_regime);

struct CasResult {
  double cas = 0.0;
  bool edge_retained = false;
};

// Counterfactual attribution score p_with - p_without; retain edges above
// tau (default 0.15, strict inequality).
CasResult cas_score(Probability p_with, Probability p_without,
                    Probability tau = Probability(0.15));

// Attribution-error floor 1 - (1-eps)^k for a k-stage pipeline.
Probability attribution_floor(std::uint32_t k_stages, Probability eps_stage);

// Theoretical regret envelope C d sqrt(T ln(T/delta)). The default C = 2
// matches the published worked bound at T = 1000, delta = 0.05.
double regret_bound(std::uint64_t horizon, std::uint32_t feature_dim,
                    Probability delta, double c = 2.0);

struct CertifiedRadius {
  std::uint32_t radius = 0;
  bool vacuous = false;  // vote fraction <= 1/2 certifies nothing
};

// Delta* = floor( ln(p_A / (1-p_A)) / (2 |ln(1-p)|) ) for p_A > 1/2.
CertifiedRadius certified_radius(Probability p_a, Probability retention);

}  // namespace speclab::grounding
