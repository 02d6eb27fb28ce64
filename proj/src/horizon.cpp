#include "speclab/horizon.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "speclab/chain.hpp"

namespace speclab::horizon {

void ArchProfile::validate() const {
  if (layers < 1) throw std::invalid_argument("ArchProfile: layers >= 1");
  if (width < 3) throw std::invalid_argument("ArchProfile: width >= 3");
  if (!(c_hat > 0.0)) throw std::invalid_argument("ArchProfile: c_hat > 0");
}

void TaskProfile::validate() const {
  if (!(depth > 0.0)) throw std::invalid_argument("TaskProfile: depth > 0");
  if (per_step_error.value() >= 0.5)
    throw std::invalid_argument("TaskProfile: per-step error must be < 0.5");
  if (m_req < 1 || n_train < 1)
    throw std::invalid_argument("TaskProfile: m_req, n_train >= 1");
  if (n_req < n_train)
    throw std::invalid_argument("TaskProfile: n_req >= n_train");
}

double horizon_predict(const ArchProfile& arch) {
  arch.validate();
  return arch.c_hat * std::log(static_cast<double>(arch.layers)) *
         std::sqrt(std::log(static_cast<double>(arch.width)));
}

Probability decay_bound(double delta, double d_star, std::uint32_t layers,
                        std::uint32_t width, double c3) {
  if (!(c3 > 0.0)) throw std::invalid_argument("decay_bound: c3 > 0");
  if (layers < 1 || width < 3)
    throw std::invalid_argument("decay_bound: bad architecture");
  if (delta <= d_star) return Probability(1.0);
  const double gap = delta - d_star;
  const double denom = static_cast<double>(layers) *
                       static_cast<double>(layers) *
                       std::log(static_cast<double>(width));
  return Probability(std::exp(-c3 * gap * gap / denom));
}

Probability schematic_decay(double delta, double d_star) {
  if (!(d_star > 0.0)) throw std::invalid_argument("schematic_decay: d* > 0");
  const double ratio = delta / d_star;
  return Probability(std::exp(-ratio * ratio * std::log(2.0)));
}

Regime regime_classify(double delta, double d_star) {
  if (!(d_star > 0.0)) throw std::invalid_argument("regime_classify: d* > 0");
  if (delta <= d_star) return Regime::kChainOfThought;
  if (delta <= 2.0 * d_star) return Regime::kKRedundantVerification;
  return Regime::kToolDelegation;
}

ClcResult clc_ratio(const TaskProfile& task, double d_star) {
  task.validate();
  if (!(d_star > 0.0)) throw std::invalid_argument("clc_ratio: d* > 0");
  const double length_ratio =
      static_cast<double>(task.n_req) / static_cast<double>(task.n_train);
  const double ratio =
      2.0 * static_cast<double>(task.m_req) * std::log2(length_ratio) / d_star;
  return {ratio, ratio >= 1.0};
}

PlanningCapacity planning_capacity(const ArchProfile& arch,
                                   std::uint64_t states, std::uint64_t actions,
                                   double c_upper, double c_lower) {
  arch.validate();
  if (states < 2 || actions < 2)
    throw std::invalid_argument("planning_capacity: states, actions >= 2");
  if (!(c_upper > 0.0 && c_lower > 0.0))
    throw std::invalid_argument("planning_capacity: constants > 0");
  const double L = static_cast<double>(arch.layers);
  const double log_d = std::log(static_cast<double>(arch.width));
  const double bits_per_step = std::log(static_cast<double>(states)) +
                               std::log(static_cast<double>(actions));
  return {c_lower * L * log_d / bits_per_step,
          c_upper * L * L * log_d / bits_per_step};
}

Probability compositional_ceiling(std::uint64_t answer_space) {
  if (answer_space < 2)
    throw std::invalid_argument("compositional_ceiling: |Y| >= 2");
  return Probability(0.75 + 0.5 / static_cast<double>(answer_space));
}

Probability finetune_envelope(double d_star, double d_test,
                              Probability acc_base_at_dstar, double c_env) {
  if (!(d_star > 0.0))
    throw std::invalid_argument("finetune_envelope: d* > 0");
  if (!(d_test > d_star))
    throw std::invalid_argument(
        "finetune_envelope: requires d_test > d*; the envelope is inactive "
        "within the horizon");
  if (c_env < 0.0) throw std::invalid_argument("finetune_envelope: c_env >= 0");
  const double factor = d_star / d_test;
  const double bound = acc_base_at_dstar.value() * factor + c_env * factor;
  return clamp_to_unit(bound).value;
}

DesignPlan design_plan(const ArchProfile& arch, const TaskProfile& task,
                       const DesignPlanConfig& config) {
  arch.validate();
  task.validate();

  DesignPlan plan;
  plan.d_star = horizon_predict(arch);
  plan.regime = regime_classify(task.depth, plan.d_star);
  plan.advisory_only = plan.regime == Regime::kToolDelegation;

  // Verification level uses the task depth as the chain length.
  const auto depth_steps = static_cast<std::uint64_t>(
      std::max(1.0, std::ceil(task.depth)));
  plan.k_star = static_cast<std::uint32_t>(chain::optimal_k(
      depth_steps, task.target_error, task.per_step_error));
  plan.n_star = chain::safe_length(task.per_step_error, task.target_error);
  plan.h_star = chain::entropy_threshold(config.lambda, config.gamma_hat);
  plan.supervision =
      config.non_redundant ? Supervision::kProcess : Supervision::kOutcome;

  std::vector<StrategyCandidate> candidates = config.candidates;
  if (candidates.empty()) {
    candidates = {
        {Strategy::kBestOfNWithPRM,
         chain::scaling_exponent(chain::StrategySpec::best_of_n_imperfect(
             Probability(0.06))).alpha},
        {Strategy::kBeam,
         chain::scaling_exponent(chain::StrategySpec::beam(4)).alpha},
    };
  }
  const auto best = std::max_element(
      candidates.begin(), candidates.end(),
      [](const StrategyCandidate& a, const StrategyCandidate& b) {
        return a.exponent < b.exponent;
      });
  plan.strategy = best->label;
  plan.strategy_exponent = best->exponent;
  return plan;
}

const std::array<ArchReferenceRow, 12>& arch_reference_rows() {
  static const std::array<ArchReferenceRow, 12> rows = {{
      {"GPT-2 Small", 12, 768, 19.5},
      {"GPT-2 Medium", 24, 1024, 24.2},
      {"GPT-2 Large", 36, 1280, 27.1},
      {"Llama-2 7B", 32, 4096, 27.4},
      {"Llama-2 13B", 40, 5120, 30.1},
      {"Llama-3 8B", 32, 4096, 27.4},
      {"Mistral 7B", 32, 4096, 27.4},
      {"Phi-2 2.7B", 32, 2560, 25.8},
      {"Gemma-2 2B", 18, 2048, 21.0},
      {"Gemma-2 9B", 42, 3584, 30.6},
      {"Qwen-2.5 7B", 28, 3584, 25.7},
      {"OLMo 7B", 32, 4096, 27.4},
  }};
  return rows;
}

}  // namespace speclab::horizon
