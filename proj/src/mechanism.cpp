#include "speclab/mechanism.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "speclab/parallel.hpp"
#include "speclab/rng.hpp"

namespace speclab::trust {

void Marketplace::validate() const {
  if (n_agents == 0 || m_tasks == 0)
    throw std::invalid_argument("Marketplace: agents, tasks >= 1");
  if (values.size() != m_tasks)
    throw std::invalid_argument("Marketplace: values size mismatch");
  if (competence.size() != static_cast<std::size_t>(n_agents) * m_tasks)
    throw std::invalid_argument("Marketplace: competence size mismatch");
  if (!cost.empty() &&
      cost.size() != static_cast<std::size_t>(n_agents) * m_tasks)
    throw std::invalid_argument("Marketplace: cost size mismatch");
  if (substitution_gap.size() != m_tasks)
    throw std::invalid_argument("Marketplace: gap size mismatch");
  if (!budgets.empty() && budgets.size() != n_agents)
    throw std::invalid_argument("Marketplace: budgets size mismatch");
  for (double v : values)
    if (!(v > 0.0)) throw std::invalid_argument("Marketplace: V_j > 0");
  for (double q : competence)
    if (q < 0.0 || q > 1.0)
      throw std::invalid_argument("Marketplace: q in [0,1]");
  for (double g : substitution_gap)
    if (g < 0.0 || g > 1.0)
      throw std::invalid_argument("Marketplace: Delta in [0,1]");
}

double Marketplace::v_min() const {
  return *std::min_element(values.begin(), values.end());
}
double Marketplace::v_max() const {
  return *std::max_element(values.begin(), values.end());
}

VcgCounterexample vcg_counterexample(
    const std::map<std::string, double>& valuation_prompt_a,
    const std::map<std::string, double>& valuation_prompt_b, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("vcg_counterexample: beta > 0");

  // Locate a strict preference reversal on a common outcome pair.
  std::string best_a, best_b;
  double gap_truth = 0.0, gap_reversed = 0.0;
  bool found = false;
  for (const auto& [x, vx] : valuation_prompt_a) {
    const auto itx = valuation_prompt_b.find(x);
    if (itx == valuation_prompt_b.end()) continue;
    for (const auto& [y, vy] : valuation_prompt_a) {
      if (x == y) continue;
      const auto ity = valuation_prompt_b.find(y);
      if (ity == valuation_prompt_b.end()) continue;
      if (vx > vy && itx->second < ity->second) {
        best_a = x;  // preferred under prompt A
        best_b = y;  // preferred under prompt B
        gap_truth = vx - vy;
        gap_reversed = ity->second - itx->second;
        found = true;
        break;
      }
    }
    if (found) break;
  }
  if (!found)
    throw std::invalid_argument(
        "vcg_counterexample: valuations agree in order on every outcome "
        "pair; no reversal to exploit");

  VcgCounterexample out;
  out.outcome_truth = best_a;
  out.outcome_deviant = best_b;

  // Opponent tuned so its preference for the truthful outcome exceeds the
  // agent's by exactly beta.
  const double alpha = gap_truth + beta;
  out.opponent_valuation = {{best_a, alpha}, {best_b, 0.0}};

  // Misreport: the reversed valuation, rescaled until it actually moves the
  // allocation. Scaling keeps the reported ordering.
  const double scale = (alpha + 1.0) / gap_reversed;
  out.misreport = {
      {best_a, valuation_prompt_b.at(best_a) * scale},
      {best_b, valuation_prompt_b.at(best_b) * scale}};

  // Execute allocation and payments on the two-outcome instance.
  const auto allocate = [&](double agent_a, double agent_b) {
    const double total_a = agent_a + out.opponent_valuation.at(best_a);
    const double total_b = agent_b + out.opponent_valuation.at(best_b);
    return total_a >= total_b ? best_a : best_b;
  };
  const std::string opponent_alone =
      out.opponent_valuation.at(best_a) >= out.opponent_valuation.at(best_b)
          ? best_a
          : best_b;
  const auto payment = [&](const std::string& allocated) {
    return out.opponent_valuation.at(allocated) -
           out.opponent_valuation.at(opponent_alone);
  };

  const auto va = valuation_prompt_a;
  const std::string alloc_truth = allocate(va.at(best_a), va.at(best_b));
  const std::string alloc_dev =
      allocate(out.misreport.at(best_a), out.misreport.at(best_b));
  const double u_truth = va.at(alloc_truth) - payment(alloc_truth);
  const double u_dev = va.at(alloc_dev) - payment(alloc_dev);
  out.deviation_profit = u_dev - u_truth;
  return out;
}

std::string MechanismTree::dump() const {
  std::ostringstream os;
  os << "clinching tree (" << nodes.size() << " decision nodes)\n";
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    os << "  node " << i << ": agent " << n.agent << " offered task "
       << n.task << " at price " << n.posted_price << "; accept "
       << n.accept_payoff << ", best reject " << n.reject_payoff
       << ", margin " << n.osp_margin << "\n";
  }
  os << "  greedy welfare " << greedy_welfare << ", delta_min " << delta_min
     << "\n";
  return os.str();
}

MechanismTree build_millipede(const Marketplace& market, double sigma_pi,
                              double sigma_ratio_limit) {
  market.validate();
  if (sigma_pi < 0.0)
    throw std::invalid_argument("build_millipede: sigma_pi >= 0");

  const std::uint32_t n = market.n_agents, m = market.m_tasks;
  auto competitor_best = [&](std::uint32_t agent, std::uint32_t task) {
    double best = 0.0;
    for (std::uint32_t other = 0; other < n; ++other)
      if (other != agent) best = std::max(best, market.q(other, task));
    return best;
  };

  // Agents in descending order of their best achievable value.
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::vector<double> best_value(n, 0.0);
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = 0; j < m; ++j)
      best_value[i] = std::max(best_value[i], market.q(i, j) * market.values[j]);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) {
                     return best_value[a] > best_value[b];
                   });

  MechanismTree tree;
  tree.greedy_assignment.assign(m, -1);
  std::vector<bool> allocated(m, false);
  tree.delta_min = std::numeric_limits<double>::infinity();

  for (std::uint32_t rank = 0; rank < n; ++rank) {
    const std::uint32_t agent = order[rank];
    double budget = market.budgets.empty()
                        ? std::numeric_limits<double>::infinity()
                        : market.budgets[agent];
    if (budget <= 0.0) budget = std::numeric_limits<double>::infinity();

    // Offerable tasks: unallocated, agent is the strongest, price nonneg.
    struct Offer {
      std::uint32_t task;
      double price;
      double payoff;
      double qv;
    };
    std::vector<Offer> offers;
    for (std::uint32_t j = 0; j < m; ++j) {
      if (allocated[j]) continue;
      const double q = market.q(agent, j);
      if (q <= 0.0) continue;
      const double q2 = competitor_best(agent, j);
      if (q + 1e-15 < q2) continue;  // another agent will be offered this
      const double price = q2 <= 0.0 ? 0.0 : market.values[j] * q2 / q;
      offers.push_back({j, price, market.values[j] * q - price,
                        market.values[j] * q});
    }
    std::stable_sort(offers.begin(), offers.end(),
                     [](const Offer& a, const Offer& b) { return a.qv > b.qv; });

    for (std::size_t k = 0; k < offers.size(); ++k) {
      if (offers[k].price > budget) break;
      ClinchNode node;
      node.agent = agent;
      node.task = offers[k].task;
      node.posted_price = offers[k].price;
      node.accept_payoff = offers[k].payoff;
      node.reject_payoff =
          k + 1 < offers.size() ? std::max(0.0, offers[k + 1].payoff) : 0.0;
      node.osp_margin = node.accept_payoff - node.reject_payoff;
      if (node.osp_margin < 0.0)
        throw NegativeMargin("build_millipede: negative OSP margin at agent " +
                             std::to_string(agent) + ", task " +
                             std::to_string(node.task));
      tree.nodes.push_back(node);
      tree.delta_min = std::min(tree.delta_min, node.osp_margin);
      allocated[node.task] = true;
      tree.greedy_assignment[node.task] = static_cast<std::int32_t>(agent);
      tree.greedy_welfare +=
          market.values[node.task] * market.q(agent, node.task);
      budget -= node.posted_price;
    }
  }

  if (!std::isfinite(tree.delta_min)) tree.delta_min = 0.0;
  if (sigma_pi > 0.0) {
    if (tree.delta_min <= 0.0 ||
        sigma_pi / tree.delta_min > sigma_ratio_limit)
      throw GuardTripped(
          "build_millipede: prompt-reversal guard tripped; sigma_pi / "
          "delta_min exceeds " +
          std::to_string(sigma_ratio_limit));
  }
  return tree;
}

MarketplaceRun run_marketplace(const MechanismTree& tree,
                               const Marketplace& market,
                               const std::vector<AgentModel>& agents,
                               std::uint64_t trials, Seed seed,
                               unsigned threads) {
  market.validate();
  if (agents.size() != market.n_agents)
    throw std::invalid_argument("run_marketplace: one AgentModel per agent");
  for (const auto& a : agents) a.validate();
  if (trials == 0) throw std::invalid_argument("run_marketplace: trials >= 1");

  const std::size_t node_count = tree.nodes.size();
  std::vector<double> welfare(trials, 0.0);
  std::vector<std::uint32_t> violations(trials, 0);

  parallel_for(trials, threads, [&](std::size_t trial) {
    Rng rng(derive_trial_seed(seed, trial));
    double w = 0.0;
    std::uint32_t bad = 0;
    std::vector<std::int32_t> assign(market.m_tasks, -1);
    for (const auto& node : tree.nodes) {
      const auto& agent = agents[node.agent];
      double perceived = node.accept_payoff;
      if (agent.prompt_shift > 0.0)
        perceived += rng.uniform(-agent.prompt_shift, agent.prompt_shift);
      bool action_accept = perceived >= node.reject_payoff;
      if (agent.eps1.value() > 0.0 && rng.bernoulli(agent.eps1.value()))
        action_accept = !action_accept;
      // Accept is the obviously dominant action at every built node.
      if (!action_accept) {
        ++bad;
        continue;
      }
      assign[node.task] = static_cast<std::int32_t>(node.agent);
      w += market.values[node.task] * market.q(node.agent, node.task);
    }
    welfare[trial] = w;
    violations[trial] = bad;
  });

  MarketplaceRun out;
  std::uint64_t total_violations = 0;
  double welfare_sum = 0.0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    total_violations += violations[t];
    welfare_sum += welfare[t];
  }
  out.welfare = welfare_sum / static_cast<double>(trials);
  const std::uint64_t node_visits = trials * node_count;
  out.violation_rate = node_visits == 0
                           ? SimReport{0.0, 0.0, 0.0, 0, seed}
                           : make_proportion_report(total_violations,
                                                    node_visits, seed);
  out.modal_assignment = tree.greedy_assignment;
  return out;
}

SelectiveRun run_selective(const Marketplace& market,
                           const MechanismTree& tree, Probability eps,
                           Probability alpha, double kappa,
                           std::uint64_t trials, Seed seed, ExpBase base,
                           unsigned threads) {
  market.validate();
  if (trials == 0) throw std::invalid_argument("run_selective: trials >= 1");
  const double miss = exp_base_negative_kappa(kappa, base);
  const double v_max = market.v_max();

  double ideal = 0.0;
  std::vector<std::uint32_t> tasks;
  for (std::uint32_t j = 0; j < market.m_tasks; ++j) {
    if (tree.greedy_assignment[j] < 0) continue;
    tasks.push_back(j);
    ideal += market.values[j] *
             market.q(static_cast<std::uint32_t>(tree.greedy_assignment[j]), j);
  }

  std::vector<double> loss(trials, 0.0);
  std::vector<double> verified_fraction(trials, 0.0);
  parallel_for(trials, threads, [&](std::size_t trial) {
    Rng rng(derive_trial_seed(seed, trial));
    double trial_loss = 0.0;
    std::uint32_t verified = 0;
    for (const std::uint32_t j : tasks) {
      const double vj = market.values[j];
      // Mechanism noise: strategic misallocation costs V_max.
      if (eps.value() > 0.0 && rng.bernoulli(eps.value()))
        trial_loss += v_max;
      // Value-stratified verification: base rate alpha with a per-task
      // floor alpha V_j / V_max (the floor binds only below the base rate).
      const double rate =
          std::min(1.0, std::max(alpha.value(), alpha.value() * vj / v_max));
      if (rng.bernoulli(rate)) {
        ++verified;
        if (miss > 0.0 && rng.bernoulli(miss)) trial_loss += vj;
      } else {
        trial_loss += vj * market.substitution_gap[j];
      }
    }
    loss[trial] = trial_loss;
    verified_fraction[trial] =
        tasks.empty() ? 0.0
                      : static_cast<double>(verified) /
                            static_cast<double>(tasks.size());
  });

  SelectiveRun out;
  out.ideal_welfare = ideal;
  double mean_loss = 0.0, mean_verified = 0.0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    mean_loss += loss[t];
    mean_verified += verified_fraction[t];
  }
  mean_loss /= static_cast<double>(trials);
  mean_verified /= static_cast<double>(trials);
  double var = 0.0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    const double d = loss[t] - mean_loss;
    var += d * d;
  }
  var /= static_cast<double>(trials > 1 ? trials - 1 : 1);
  const double se = std::sqrt(var / static_cast<double>(trials));

  out.mean_loss = mean_loss;
  out.verified_fraction = mean_verified;
  out.welfare.estimate = ideal - mean_loss;
  out.welfare.ci_low = ideal - (mean_loss + 1.959963984540054 * se);
  out.welfare.ci_high = ideal - (mean_loss - 1.959963984540054 * se);
  out.welfare.trials = trials;
  out.welfare.master_seed = seed;
  return out;
}

}  // namespace speclab::trust
