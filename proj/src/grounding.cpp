#include "speclab/grounding.hpp"

#include <cmath>
#include <stdexcept>

namespace speclab::grounding {

MetricRequirements metric_requirements(std::uint32_t k_stages,
                                       Probability resolution) {
  if (k_stages == 0)
    throw std::invalid_argument("metric_requirements: k >= 1");
  if (!(resolution.value() > 0.0))
    throw std::invalid_argument("metric_requirements: resolution > 0");
  MetricRequirements out;
  out.min_metrics = k_stages;
  out.ambiguity_dim = k_stages > 0 ? k_stages - 1 : 0;
  out.ambiguity_count_order =
      std::pow(resolution.value(), -static_cast<double>(out.ambiguity_dim));
  return out;
}

void ConflictInstance::validate() const {
  if (!(h_claim > 0.0)) throw std::invalid_argument("ConflictInstance: H(c) > 0");
  if (i_meta < 0.0 || i_meta > h_claim)
    throw std::invalid_argument("ConflictInstance: 0 <= I_meta <= H(c)");
}

Route route_conflict(const ConflictInstance& c) {
  c.validate();
  return c.i_meta >= c.h_claim / 2.0 ? Route::kShallow : Route::kDeep;
}

RoutingCost routing_cost(Route routed, Route true_regime) {
  if (routed == Route::kShallow && true_regime == Route::kDeep)
    return {9.2, 0.0};
  if (routed == Route::kDeep && true_regime == Route::kShallow)
    return {0.0, 0.94};
  return {0.0, 0.0};
}

CasResult cas_score(Probability p_with, Probability p_without,
                    Probability tau) {
  const double cas = p_with.value() - p_without.value();
  return {cas, cas > tau.value()};
}

Probability attribution_floor(std::uint32_t k_stages, Probability eps_stage) {
  if (k_stages == 0) throw std::invalid_argument("attribution_floor: k >= 1");
  if (eps_stage.value() >= 0.5)
    throw std::invalid_argument("attribution_floor: eps < 0.5");
  return Probability(-std::expm1(static_cast<double>(k_stages) *
                                 std::log1p(-eps_stage.value())));
}

double regret_bound(std::uint64_t horizon, std::uint32_t feature_dim,
                    Probability delta, double c) {
  if (feature_dim == 0) throw std::invalid_argument("regret_bound: d >= 1");
  if (!(delta.value() > 0.0 && delta.value() < 1.0))
    throw std::invalid_argument("regret_bound: delta in (0,1)");
  if (!(c > 0.0)) throw std::invalid_argument("regret_bound: C > 0");
  if (horizon == 0) return 0.0;
  const auto t = static_cast<double>(horizon);
  return c * static_cast<double>(feature_dim) *
         std::sqrt(t * std::log(t / delta.value()));
}

CertifiedRadius certified_radius(Probability p_a, Probability retention) {
  if (!(retention.value() > 0.0 && retention.value() < 1.0))
    throw std::invalid_argument("certified_radius: retention in (0,1)");
  if (p_a.value() <= 0.5) return {0, true};
  const double margin = std::log(p_a.value() / (1.0 - p_a.value()));
  const double per_edit = 2.0 * std::abs(std::log1p(-retention.value()));
  return {static_cast<std::uint32_t>(std::floor(margin / per_edit)), false};
}

}  // namespace speclab::grounding
