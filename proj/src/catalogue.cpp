#include "speclab/catalogue.hpp"

#include <cmath>
#include <stdexcept>

#include "speclab/adaptation.hpp"
#include "speclab/chain.hpp"
#include "speclab/grounding.hpp"
#include "speclab/horizon.hpp"

namespace speclab::catalogue {

const std::array<Row, 16>& rows() {
  static const std::array<Row, 16> table = {{
      {1, "expressivity ceiling",
       "task class representable by bounded-depth softmax attention",
       "tasks outside the class are intractable for the base model",
       "delegate out-of-class tasks to external tools",
       CostUnits::kProbability, Rule::kDelegateToTools},
      {2, "delegation depth", "d* = c_hat ln(L) sqrt(ln d)",
       "accuracy <= exp(-(depth - d*)^2 / (L^2 ln d)) beyond d*",
       "CoT within d*; k-redundant verification to 2 d*; delegate beyond",
       CostUnits::kProbability, Rule::kDelegateBeyondHorizon},
      {3, "chain reliability", "error <= 1 - (1-eps)^n",
       "per-step errors compound across n steps",
       "cap chains at n* = floor(ln(1-delta)/ln(1-eps)); entropy stopping",
       CostUnits::kProbability, Rule::kEntropyStopAndVerify},
      {4, "supervision investment", "sample ratio n / ln n",
       "outcome supervision needs n/ln n times more labels",
       "invest in process supervision when chains are non-redundant",
       CostUnits::kMultiplier, Rule::kInvestProcessSupervision},
      {5, "adapter certificate", "m r (d+k) / N",
       "generalisation gap grows as sqrt(m r (d+k) / N)",
       "keep rank below N / (c0 (d+k) ln N); roughly 32 at corpus scale",
       CostUnits::kMultiplier, Rule::kCapAdapterRank},
      {6, "preference misspecification", "gamma* = Delta / n",
       "sample complexity jumps from n ln n to n^2 past gamma*",
       "measure gamma; budget quadratic pairs; prefer reward modelling",
       CostUnits::kSampleCount, Rule::kBudgetQuadraticPreferencePairs},
      {7, "synthetic-data collapse", "T^2 d_eff / n_min vs 128 pi",
       "TV distance to the source approaches 1 under pure replacement",
       "retain at least 1% real data every generation",
       CostUnits::kProbability, Rule::kRetainRealDataFraction},
      {8, "edit capacity", "K* = tau sqrt(d) / (c eta (1 - 1/alpha))",
       "off-target interference accumulates past K* edits",
       "re-fine-tune instead of editing beyond K*",
       CostUnits::kMultiplier, Rule::kRetrainBeyondEditCapacity},
      {9, "metric resolution", "k pipeline stages",
       "single scores leave ~delta^-(k-1) indistinguishable diagnoses",
       "report at least k stage-level metrics",
       CostUnits::kMultiplier, Rule::kUseStageLevelMetrics},
      {10, "conflict routing", "I_meta >= H(claim) / 2",
       "deep-as-shallow loses 9.2 pp; shallow-as-deep wastes 94% compute",
       "classify conflicts before routing",
       CostUnits::kPercentagePoints, Rule::kClassifyConflictsBeforeRouting},
      {11, "retrieval timing", "uncertainty-weighted UCB threshold",
       "regret of fixed policies grows linearly; UCB is d sqrt(T ln T)",
       "retrieve during reasoning via the step-level policy",
       CostUnits::kMultiplier, Rule::kAdaptiveRetrievalPolicy},
      {12, "attribution standard", "interventional score above tau",
       "correlational attribution misses post-rationalised citations",
       "attribute by intervention; budget effort linearly in stages",
       CostUnits::kPercentagePoints, Rule::kInterventionalAttribution},
      {13, "certified grounding",
       "Delta* = floor(ln(p_A/(1-p_A)) / (2 |ln(1-p)|))",
       "undefended vote flips under small graph edits",
       "aggregate over random subgraphs; publish the certified radius",
       CostUnits::kMultiplier, Rule::kCertifiedSubgraphVoting},
      {14, "mechanism choice", "prompt-dependent preference reversals",
       "classical truthful auctions admit profitable misreports",
       "use bounded-lookahead obviously-dominant mechanisms",
       CostUnits::kProbability, Rule::kUseOspMechanism},
      {15, "verification tax", "tau_op >= log p per nonlinear op",
       "proof length floor log p cannot be engineered away",
       "reduce the number of nonlinear ops, not their unit cost",
       CostUnits::kMultiplier, Rule::kMinimiseNonlinearOps},
      {16, "welfare composition", "mechanism and verification jointly present",
       "either alone loses linearly in tasks or agents",
       "deploy both; selectively verify at the welfare-optimal rate",
       CostUnits::kWelfareFraction, Rule::kDeployMechanismAndVerification},
  }};
  return table;
}

std::optional<double> live_boundary(int spec_id, const LiveParams& params) {
  switch (spec_id) {
    case 2:
      if (params.layers && params.width)
        return horizon::horizon_predict(
            {*params.layers, *params.width, 2.74});
      return std::nullopt;
    case 3:
      if (params.depth && params.eps)
        return chain::chain_error_bound(
            static_cast<std::uint64_t>(std::llround(*params.depth)),
            Probability(*params.eps));
      return std::nullopt;
    case 5:
      if (params.rank && params.documents && params.width) {
        const double q = static_cast<double>(*params.rank) * 2.0 *
                         static_cast<double>(*params.width);
        return q / static_cast<double>(*params.documents);
      }
      return std::nullopt;
    case 6:
      if (params.gap && params.depth)
        return *params.gap / *params.depth;  // depth reused as item count
      return std::nullopt;
    case 8:
      if (params.width) {
        adaptation::EditConfig cfg;
        cfg.d = *params.width;
        cfg.alpha = 2.1;
        cfg.c = 1.10;
        cfg.eta_mag = 0.87;
        cfg.tau = 0.1;
        return adaptation::edit_capacity(cfg).k_star;
      }
      return std::nullopt;
    case 9:
      if (params.k_stages) return static_cast<double>(*params.k_stages);
      return std::nullopt;
    case 13:
      if (params.p_a && params.retention_p)
        return static_cast<double>(
            grounding::certified_radius(Probability(*params.p_a),
                                        Probability(*params.retention_p))
                .radius);
      return std::nullopt;
    case 15:
      return 128.0;
    default:
      return std::nullopt;
  }
}

SpecVerdict make_verdict(int spec_id, double boundary_value, bool satisfied,
                         double violation_cost) {
  if (spec_id < 1 || spec_id > 16)
    throw std::invalid_argument("make_verdict: spec_id in [1,16]");
  if (violation_cost < 0.0)
    throw std::invalid_argument("make_verdict: violation cost >= 0");
  const Row& row = rows()[static_cast<std::size_t>(spec_id - 1)];
  SpecVerdict v;
  v.spec_id = spec_id;
  v.boundary_value = boundary_value;
  v.satisfied = satisfied;
  v.violation_cost = violation_cost;
  v.cost_units = row.cost_units;
  v.rule = row.rule;
  return v;
}

}  // namespace speclab::catalogue
