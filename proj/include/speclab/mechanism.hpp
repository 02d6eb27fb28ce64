#pragma once

// Marketplace model, the constructive truthfulness counterexample, the
// clinching-tree mechanism builder and the marketplace / selective
// verification simulators.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "speclab/core.hpp"
#include "speclab/trust.hpp"

namespace speclab::trust {

struct Marketplace {
  std::uint32_t n_agents = 1;
  std::uint32_t m_tasks = 1;
  std::vector<double> values;            // V_j, m_tasks entries
  std::vector<double> competence;        // q[agent * m_tasks + task]
  std::vector<double> cost;              // same layout; may be all zero
  std::vector<double> substitution_gap;  // Delta_j per task
  std::vector<double> budgets;           // per agent; <= 0 means unbounded

  double q(std::uint32_t agent, std::uint32_t task) const {
    return competence[static_cast<std::size_t>(agent) * m_tasks + task];
  }
  void validate() const;
  double v_min() const;
  double v_max() const;
};

// ---------------------------------------------------------------------------
// Constructive counterexample: prompt-dependent valuations break dominant-
// strategy truthfulness under the sign convention of the displayed payment
// rule p_i = sum_{j != i} v_j(f(v)) - sum_{j != i} v_j(f(v_-i)). The builder
// finds an outcome pair with a strict preference reversal, constructs the
// other agent so the misreport profits by exactly beta, and verifies the
// profit by executing allocation and payments. The misreport is the reversed
// valuation rescaled just enough to actually move the allocation; scaling
// preserves the reported ordering and every displayed payment quantity.
// ---------------------------------------------------------------------------

struct VcgCounterexample {
  std::string outcome_truth;   // allocated under truthful reporting
  std::string outcome_deviant; // allocated under the misreport
  std::map<std::string, double> opponent_valuation;
  std::map<std::string, double> misreport;
  double deviation_profit = 0.0;  // u_dev - u_truth, equals beta
};

VcgCounterexample vcg_counterexample(
    const std::map<std::string, double>& valuation_prompt_a,
    const std::map<std::string, double>& valuation_prompt_b, double beta);

// ---------------------------------------------------------------------------
// Clinching mechanism tree.
// ---------------------------------------------------------------------------

struct ClinchNode {
  std::uint32_t agent = 0;
  std::uint32_t task = 0;
  double posted_price = 0.0;
  double accept_payoff = 0.0;   // V q - price at this node
  double reject_payoff = 0.0;   // best next offer within lookahead 2
  double osp_margin = 0.0;      // accept - reject, >= 0 by construction
};

struct MechanismTree {
  std::vector<ClinchNode> nodes;  // visited in order; accept -> next node
  double greedy_welfare = 0.0;    // sum V_j q_{f(j),j} when all offers accepted
  std::vector<std::int32_t> greedy_assignment;  // task -> agent or -1
  double delta_min = 0.0;         // smallest positive margin

  std::string dump() const;  // textual game-tree audit form
};

struct GuardTripped : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NegativeMargin : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Builds the posted-price clinching tree: agents in descending best-value
// order; each is offered, among remaining tasks where it is the strongest
// agent, the highest q V task at price V q2 / q (q2 = best competitor,
// 0 when none). Construction fails loudly on a negative margin, and refuses
// to build when sigma_pi / delta_min exceeds the reversal guard.
MechanismTree build_millipede(const Marketplace& market, double sigma_pi = 0.0,
                              double sigma_ratio_limit = 0.05);

struct MarketplaceRun {
  double welfare = 0.0;          // mean realised welfare
  SimReport violation_rate;      // node-level deviations from dominant play
  std::vector<std::int32_t> modal_assignment;  // most frequent allocation
};

// Plays the tree with noisy agents: each node's action flips with
// probability eps1, and a uniform prompt shift in [-sigma_pi, sigma_pi]
// perturbs the perceived accept payoff before comparison.
MarketplaceRun run_marketplace(const MechanismTree& tree,
                               const Marketplace& market,
                               const std::vector<AgentModel>& agents,
                               std::uint64_t trials, Seed seed,
                               unsigned threads = 1);

struct SelectiveRun {
  SimReport welfare;          // normal-approximation interval on mean welfare
  double verified_fraction = 0.0;
  double mean_loss = 0.0;     // W* - welfare, averaged
  double ideal_welfare = 0.0; // W* of the given assignment
};

// Selective verification on an assignment where every agent substitutes:
// unverified tasks lose V_j Delta_j; verified ones escape detection with
// probability base^-kappa and then lose V_j; mechanism noise independently
// loses V_max with probability eps per task. Losses accrue additively.
SelectiveRun run_selective(const Marketplace& market,
                           const MechanismTree& tree, Probability eps,
                           Probability alpha, double kappa,
                           std::uint64_t trials, Seed seed,
                           ExpBase base = ExpBase::kTwo, unsigned threads = 1);

}  // namespace speclab::trust
