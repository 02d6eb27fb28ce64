#include "speclab/trust.hpp"

#include <cmath>
#include <stdexcept>

namespace speclab::trust {

void AgentModel::validate() const {
  if (eps1.value() >= 0.5)
    throw std::invalid_argument("AgentModel: eps1 < 0.5");
  if (prompt_shift < 0.0)
    throw std::invalid_argument("AgentModel: sigma_pi >= 0");
  if (lookahead == 0) throw std::invalid_argument("AgentModel: lookahead >= 1");
}

OspEpsilon osp_epsilon(const AgentModel& agent, std::uint64_t info_sets,
                       double delta_min) {
  agent.validate();
  if (info_sets == 0) throw std::invalid_argument("osp_epsilon: T >= 1");
  if (!(delta_min > 0.0))
    throw std::invalid_argument("osp_epsilon: delta_min > 0");
  const double ratio = agent.prompt_shift / delta_min;
  const double raw = static_cast<double>(info_sets) * ratio * ratio;
  OspEpsilon out;
  out.eps2 = clamp_to_unit(raw).value;
  out.eps_total = clamp_to_unit(agent.eps1.value() + out.eps2.value()).value;
  return out;
}

StabilityBound coalition_stability_bound(std::uint64_t n_agents,
                                         Probability eps, Probability eta) {
  const double raw =
      1.0 - static_cast<double>(n_agents) * eps.value() - eta.value();
  if (raw <= 0.0) return {Probability(0.0), true};
  return {clamp_to_unit(raw).value, false};
}

DetectionBudget smd_sample_complexity(double smd, Probability gamma,
                                      Probability lambda_margin,
                                      Probability eps, std::uint64_t n_agents,
                                      Probability delta, double c,
                                      std::uint32_t coalition_size) {
  if (!(smd > 0.0)) throw std::invalid_argument("smd_sample_complexity: SMD > 0");
  if (!(gamma.value() > 0.0 && lambda_margin.value() > 0.0 &&
        eps.value() > 0.0))
    throw std::invalid_argument(
        "smd_sample_complexity: gamma, lambda, eps > 0");
  if (n_agents == 0)
    throw std::invalid_argument("smd_sample_complexity: n_a >= 1");
  if (!(delta.value() > 0.0 && delta.value() < 1.0))
    throw std::invalid_argument("smd_sample_complexity: delta in (0,1)");
  if (!(c > 0.0)) throw std::invalid_argument("smd_sample_complexity: c > 0");

  DetectionBudget out;
  const double g = gamma.value(), l = lambda_margin.value(), e = eps.value();
  out.samples = c * smd / (g * g * l * l * e * e) *
                std::log(static_cast<double>(n_agents) / delta.value());
  out.tractable = smd <= 2.0 * std::log(static_cast<double>(n_agents));
  out.np_hard_regime = coalition_size >= 3;
  return out;
}

void TaxConfig::validate() const {
  if (!(log_p > 0.0)) throw std::invalid_argument("TaxConfig: log p > 0");
  for (double v : {overhead_mle, overhead_lookup, overhead_fs,
                   overhead_lookup_relu, overhead_lookup_softmax})
    if (v < 0.0) throw std::invalid_argument("TaxConfig: overheads >= 0");
}

NonlinearityTax nonlinearity_tax(const TaxConfig& cfg) {
  cfg.validate();
  auto stacked_with = [&](double lookup) {
    return cfg.log_p * (1.0 + cfg.overhead_mle) * (1.0 + lookup) *
           (1.0 + cfg.overhead_fs);
  };
  NonlinearityTax out;
  out.floor = cfg.log_p;
  out.stacked = stacked_with(cfg.overhead_lookup);
  const double relu_frac = cfg.relu_fraction.value();
  out.headline = relu_frac * stacked_with(cfg.overhead_lookup_relu) +
                 (1.0 - relu_frac) * stacked_with(cfg.overhead_lookup_softmax);
  return out;
}

IopFloor iop_floor(std::uint64_t n_ops, double log_p, Activation activation,
                   bool conditional) {
  if (n_ops == 0) throw std::invalid_argument("iop_floor: n >= 1");
  if (!(log_p > 1.0)) throw std::invalid_argument("iop_floor: log p > 1");
  const auto n = static_cast<double>(n_ops);
  switch (activation) {
    case Activation::kReLU:
      return {n * log_p, Conditionality::kUnconditional};
    case Activation::kSoftmax:
      if (conditional)
        return {n * log_p * log_p, Conditionality::kConditionalOnConjecture};
      return {n * log_p, Conditionality::kUnconditional};
    case Activation::kGELU:
      return {n * log_p * std::log(log_p),
              Conditionality::kConditionalOnConjecture};
  }
  throw std::logic_error("iop_floor: unknown activation");
}

FoldingCosts folding_costs(std::uint32_t d_layers, std::uint64_t n_max,
                           double c_verifier, double c_circuit) {
  if (d_layers == 0 || n_max < 2)
    throw std::invalid_argument("folding_costs: d >= 1, n_max >= 2");
  if (!(c_verifier > 0.0 && c_circuit > 0.0))
    throw std::invalid_argument("folding_costs: constants > 0");
  FoldingCosts out;
  const double log2n = std::log2(static_cast<double>(n_max));
  out.verifier_ops = c_verifier * static_cast<double>(d_layers) * log2n;
  out.recursive_gates = c_circuit * log2n * log2n;
  out.prover_ops =
      static_cast<double>(d_layers) * static_cast<double>(n_max) * log2n;
  switch (n_max) {
    case 768: out.reference_gates = 55296.0; break;
    case 1024: out.reference_gates = 71680.0; break;
    case 4096: out.reference_gates = 294912.0; break;
    case 5120: out.reference_gates = 409600.0; break;
    default: break;
  }
  return out;
}

double exp_base_negative_kappa(double kappa, ExpBase base) {
  if (!(kappa > 0.0)) throw std::invalid_argument("kappa > 0 required");
  return base == ExpBase::kTwo ? std::exp2(-kappa) : std::exp(-kappa);
}

WelfareLoss welfare_loss(WelfareScenario scenario, const WelfareMarket& market,
                         Probability eps, double kappa, ExpBase base) {
  if (market.n_agents == 0 || market.m_tasks == 0 || !(market.v_max > 0.0))
    throw std::invalid_argument("welfare_loss: bad market");
  WelfareLoss out;
  switch (scenario) {
    case WelfareScenario::kNoVerification:
      out.loss = market.sum_value_gap;
      return out;
    case WelfareScenario::kNoMechanism:
      out.loss =
          static_cast<double>(market.n_agents) * eps.value() * market.v_max;
      return out;
    case WelfareScenario::kBoth: {
      out.verification_term = static_cast<double>(market.m_tasks) *
                              exp_base_negative_kappa(kappa, base) *
                              market.v_max;
      out.loss = static_cast<double>(market.n_agents) * eps.value() *
                     market.v_max +
                 out.verification_term;
      return out;
    }
  }
  throw std::logic_error("welfare_loss: unknown scenario");
}

Probability selective_alpha(Probability gap, double kappa, double cost_ver,
                            ExpBase base) {
  if (!(cost_ver >= 0.0))
    throw std::invalid_argument("selective_alpha: cost >= 0");
  const double b = exp_base_negative_kappa(kappa, base);
  const double margin = gap.value() - b;
  if (!(margin > 0.0))
    throw std::invalid_argument(
        "selective_alpha: gap must exceed the soundness error base^-kappa");
  return Probability(margin / (gap.value() + cost_ver * margin));
}

}  // namespace speclab::trust
