#include "speclab/compose.hpp"

#include <cmath>
#include <stdexcept>

namespace speclab::compose {

void CompositionParams::validate() const {
  if (!(depth > 0.0)) throw std::invalid_argument("CompositionParams: n > 0");
  if (eps.value() >= 0.5)
    throw std::invalid_argument("CompositionParams: eps < 0.5");
  if (!(retrieval_q.value() > 0.0))
    throw std::invalid_argument("CompositionParams: q in (0,1]");
}

Probability retention_factor(double c_hop_bits, double h_cond_bits) {
  if (!(h_cond_bits > 0.0))
    throw std::invalid_argument("retention_factor: conditional entropy > 0");
  if (c_hop_bits < 0.0)
    throw std::invalid_argument("retention_factor: capacity >= 0");
  return Probability(std::min(1.0, c_hop_bits / h_cond_bits));
}

Probability joint_reliability(const CompositionParams& p) {
  p.validate();
  const double log_g =
      p.depth * std::log1p(-p.eps.value()) +
      p.depth * (1.0 - p.retention.value()) * std::log(p.retrieval_q.value());
  return Probability(std::exp(log_g));
}

double reliability_marginal_q(const CompositionParams& p) {
  p.validate();
  const double exponent = p.depth * (1.0 - p.retention.value());
  return exponent *
         std::exp(p.depth * std::log1p(-p.eps.value()) +
                  (exponent - 1.0) * std::log(p.retrieval_q.value()));
}

Attenuation marginal_attenuation(const CompositionParams& p,
                                 double n_shallow) {
  if (!(n_shallow > 0.0))
    throw std::invalid_argument("marginal_attenuation: shallow depth > 0");
  Attenuation out;
  out.marginal_at_n = reliability_marginal_q(p);
  CompositionParams shallow = p;
  shallow.depth = n_shallow;
  out.marginal_at_shallow = reliability_marginal_q(shallow);
  out.attenuation = out.marginal_at_n == 0.0
                        ? 0.0
                        : out.marginal_at_shallow / out.marginal_at_n;
  return out;
}

std::optional<double> crossover_depth(Probability eps, Probability retention,
                                      Probability retrieval_q,
                                      const CrossoverCosts& costs) {
  if (!(eps.value() > 0.0 && eps.value() < 0.5))
    throw std::invalid_argument("crossover_depth: eps in (0, 0.5)");
  if (!(retrieval_q.value() > 0.0 && retrieval_q.value() < 1.0))
    throw std::invalid_argument("crossover_depth: q in (0,1)");
  if (!(costs.cost_eps > 0.0 && costs.cost_q > 0.0))
    throw std::invalid_argument("crossover_depth: costs > 0");

  const double e = eps.value(), q = retrieval_q.value(),
               eta = retention.value();
  const double gain_eps_per_n =
      std::pow(e, costs.exponent_eps) / ((1.0 - e) * costs.cost_eps);
  const double gain_q = (1.0 - eta) *
                        std::pow(1.0 - q, costs.exponent_q) /
                        (q * costs.cost_q);

  auto residual = [&](double n) { return n * gain_eps_per_n - gain_q; };
  if (residual(1.0) > 0.0 || residual(100.0) < 0.0) return std::nullopt;

  double lo = 1.0, hi = 100.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (residual(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace speclab::compose
