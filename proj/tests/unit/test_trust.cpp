#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "speclab/mechanism.hpp"
#include "speclab/trust.hpp"

using namespace speclab;
using namespace speclab::trust;

namespace {

Marketplace two_by_two() {
  Marketplace m;
  m.n_agents = 2;
  m.m_tasks = 2;
  m.values = {1.0, 0.8};
  m.competence = {0.9, 0.3,
                  0.4, 0.8};
  m.substitution_gap = {0.1, 0.1};
  return m;
}

Marketplace four_by_four() {
  Marketplace m;
  m.n_agents = 4;
  m.m_tasks = 4;
  m.values = {1.0, 0.9, 0.8, 0.7};
  m.competence = {
      0.90, 0.85, 0.40, 0.30,
      0.45, 0.50, 0.80, 0.35,
      0.30, 0.40, 0.45, 0.75,
      0.20, 0.50, 0.30, 0.40,
  };
  m.substitution_gap = {0.1, 0.1, 0.1, 0.1};
  return m;
}

Marketplace unit_market() {
  Marketplace m;
  m.n_agents = 1;
  m.m_tasks = 1;
  m.values = {1.0};
  m.competence = {1.0};
  m.substitution_gap = {0.1};
  return m;
}

}  // namespace

TEST_CASE("osp_epsilon reproduces the published totals") {
  struct RowSpec {
    double eps1, eps2, total;
  };
  const std::vector<RowSpec> table = {
      {0.138, 0.019, 0.157},
      {0.112, 0.015, 0.127},
      {0.176, 0.031, 0.207},
      {0.193, 0.027, 0.220},
  };
  const std::uint64_t info_sets = 10;
  for (const auto& row : table) {
    AgentModel agent;
    agent.eps1 = Probability(row.eps1);
    // Back out the shift magnitude that realises the tabulated eps2.
    agent.prompt_shift = std::sqrt(row.eps2 / info_sets);
    const auto out = osp_epsilon(agent, info_sets, 1.0);
    CHECK(out.eps2.value() == doctest::Approx(row.eps2).epsilon(1e-12));
    CHECK(out.eps_total.value() == doctest::Approx(row.total).epsilon(1e-12));
  }
}

TEST_CASE("osp_epsilon design-point and zero-shift cases") {
  AgentModel agent;
  agent.eps1 = Probability(0.15);
  agent.prompt_shift = 0.05;
  const auto out = osp_epsilon(agent, 10, 1.0);
  CHECK(out.eps2.value() == doctest::Approx(0.025).epsilon(1e-12));

  agent.prompt_shift = 0.0;
  CHECK(osp_epsilon(agent, 10, 1.0).eps_total.value() ==
        doctest::Approx(0.15));
  CHECK_THROWS(osp_epsilon(agent, 10, 0.0));
}

TEST_CASE("vcg_counterexample realises the planned profit exactly") {
  const std::map<std::string, double> prompt_a{{"alloc_x", 2.0},
                                               {"alloc_y", 1.0}};
  const std::map<std::string, double> prompt_b{{"alloc_x", 1.0},
                                               {"alloc_y", 2.0}};
  for (double beta : {0.1, 0.05, 1.0}) {
    const auto example = vcg_counterexample(prompt_a, prompt_b, beta);
    CHECK(example.deviation_profit == doctest::Approx(beta).epsilon(1e-12));
    CHECK(example.outcome_truth == "alloc_x");
    CHECK(example.outcome_deviant == "alloc_y");
  }
  // Profit scales linearly in beta by construction; checked above at 3
  // magnitudes.
}

TEST_CASE("vcg_counterexample requires a strict reversal") {
  const std::map<std::string, double> same{{"x", 2.0}, {"y", 1.0}};
  CHECK_THROWS_AS(vcg_counterexample(same, same, 0.1), std::invalid_argument);
}

TEST_CASE("build_millipede on the 2x2 fixture") {
  const auto tree = build_millipede(two_by_two());
  REQUIRE(tree.nodes.size() == 2);
  CHECK(tree.nodes.size() <= 4);
  for (const auto& node : tree.nodes) CHECK(node.osp_margin >= 0.0);
  // Hand-enumerated prices: V q2 / q.
  CHECK(tree.nodes[0].posted_price == doctest::Approx(1.0 * 0.4 / 0.9));
  CHECK(tree.nodes[1].posted_price == doctest::Approx(0.8 * 0.3 / 0.8));
  CHECK(tree.greedy_welfare == doctest::Approx(0.9 + 0.64));
}

TEST_CASE("build_millipede monopoly convention: free clinch") {
  Marketplace m = unit_market();
  const auto tree = build_millipede(m);
  REQUIRE(tree.nodes.size() == 1);
  CHECK(tree.nodes[0].posted_price == 0.0);
  CHECK(tree.nodes[0].osp_margin == doctest::Approx(1.0));
}

TEST_CASE("build_millipede audits margins exhaustively on the 4x4 fixture") {
  const auto market = four_by_four();
  const auto tree = build_millipede(market);
  REQUIRE(!tree.nodes.empty());
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const auto& node = tree.nodes[i];
    // Recompute the payoff directly from the market.
    const double q = market.q(node.agent, node.task);
    CHECK(node.accept_payoff ==
          doctest::Approx(market.values[node.task] * q - node.posted_price));
    // Within lookahead 2, the best-case rejection is the next offer made to
    // the same agent (or walking away).
    double next_offer = 0.0;
    for (std::size_t j = i + 1; j < tree.nodes.size(); ++j) {
      if (tree.nodes[j].agent == node.agent) {
        next_offer = std::max(0.0, tree.nodes[j].accept_payoff);
        break;
      }
    }
    CHECK(node.reject_payoff == doctest::Approx(next_offer));
    CHECK(node.osp_margin >= -1e-12);
    CHECK(node.accept_payoff >= node.reject_payoff - 1e-12);
  }
}

TEST_CASE("build_millipede guard trips on excessive prompt shift") {
  const auto market = two_by_two();
  const auto tree = build_millipede(market);
  CHECK_THROWS_AS(
      build_millipede(market, 0.06 * tree.delta_min, 0.05), GuardTripped);
  CHECK_NOTHROW(build_millipede(market, 0.04 * tree.delta_min, 0.05));
}

TEST_CASE("run_marketplace: rational agents never violate") {
  const auto market = four_by_four();
  const auto tree = build_millipede(market);
  std::vector<AgentModel> agents(market.n_agents);
  const auto run = run_marketplace(tree, market, agents, 10000, Seed{5}, 2);
  CHECK(run.violation_rate.estimate == 0.0);
  CHECK(run.welfare == doctest::Approx(tree.greedy_welfare).epsilon(1e-12));
}

TEST_CASE("run_marketplace: noisy agents stay within the violation bound") {
  const auto market = four_by_four();
  const auto tree = build_millipede(market);
  std::vector<AgentModel> agents(market.n_agents);
  for (auto& agent : agents) {
    agent.eps1 = Probability(0.138);
    agent.prompt_shift = 0.04 * tree.delta_min;
  }
  const auto run = run_marketplace(tree, market, agents, 20000, Seed{6}, 2);
  const auto bound = osp_epsilon(agents[0], tree.nodes.size(), tree.delta_min);
  CHECK(run.violation_rate.ci_low <= bound.eps_total.value());
  CHECK(run.violation_rate.estimate ==
        doctest::Approx(0.138).epsilon(0.05));  // shift rarely flips
}

TEST_CASE("coalition_stability_bound arithmetic and clamping") {
  const auto bound =
      coalition_stability_bound(3, Probability(0.04), Probability(0.05));
  CHECK(bound.value.value() == doctest::Approx(1.0 - 0.12 - 0.05));
  CHECK_FALSE(bound.vacuous);
  CHECK(coalition_stability_bound(3, Probability(0.0), Probability(0.0))
            .value.value() == 1.0);
  const auto clamped =
      coalition_stability_bound(30, Probability(0.04), Probability(0.05));
  CHECK(clamped.value.value() == 0.0);
  CHECK(clamped.vacuous);
}

TEST_CASE("smd_sample_complexity direct evaluation and flags") {
  const auto budget = smd_sample_complexity(
      2.0 * std::log(8.0), Probability(0.1), Probability(0.1),
      Probability(0.1), 8, Probability(0.05));
  CHECK(budget.samples == doctest::Approx(2.11e7).epsilon(0.005));
  CHECK(budget.tractable);
  CHECK_FALSE(budget.np_hard_regime);

  const auto hard = smd_sample_complexity(
      100.0, Probability(0.1), Probability(0.1), Probability(0.1), 8,
      Probability(0.05), 1.0, 3);
  CHECK_FALSE(hard.tractable);
  CHECK(hard.np_hard_regime);

  // Doubling gamma divides the budget by four.
  const auto doubled = smd_sample_complexity(
      2.0 * std::log(8.0), Probability(0.2), Probability(0.1),
      Probability(0.1), 8, Probability(0.05));
  CHECK(budget.samples / doubled.samples == doctest::Approx(4.0));
}

TEST_CASE("nonlinearity_tax reproduces the published chain") {
  const auto tax = nonlinearity_tax();
  CHECK(tax.floor == 128.0);
  CHECK(tax.stacked == doctest::Approx(150.2).epsilon(0.001));
  CHECK(tax.headline == doctest::Approx(147.0).epsilon(0.01));
  CHECK(tax.floor <= tax.headline);
  CHECK(tax.headline <= tax.stacked * 1.05);
}

TEST_CASE("nonlinearity_tax ordering holds across overhead settings") {
  for (double mle : {0.0, 0.05, 0.2}) {
    for (double fs : {0.0, 0.03, 0.1}) {
      TaxConfig cfg;
      cfg.overhead_mle = mle;
      cfg.overhead_fs = fs;
      cfg.overhead_lookup_relu = 0.02;
      cfg.overhead_lookup_softmax = 0.15;
      cfg.overhead_lookup = (0.02 + 0.15) / 2.0;
      const auto tax = nonlinearity_tax(cfg);
      CHECK(tax.floor <= tax.headline + 1e-12);
      CHECK(tax.headline <= tax.stacked + 1e-9);
    }
  }
}

TEST_CASE("iop_floor by activation class") {
  const auto relu = iop_floor(1000000000ull, 128.0, Activation::kReLU, false);
  CHECK(relu.proof_length == doctest::Approx(1.28e11));
  CHECK(relu.conditionality == Conditionality::kUnconditional);

  const auto softmax_cond =
      iop_floor(1000000000ull, 128.0, Activation::kSoftmax, true);
  CHECK(softmax_cond.proof_length == doctest::Approx(1e9 * 128.0 * 128.0));
  CHECK(softmax_cond.conditionality ==
        Conditionality::kConditionalOnConjecture);

  const auto gelu = iop_floor(10, 128.0, Activation::kGELU, true);
  CHECK(gelu.proof_length ==
        doctest::Approx(10.0 * 128.0 * std::log(128.0)));
  CHECK_THROWS(iop_floor(0, 128.0, Activation::kReLU, false));
}

TEST_CASE("folding_costs formulas and reference rows") {
  const auto bert = folding_costs(12, 768);
  CHECK(bert.verifier_ops == doctest::Approx(115.0).epsilon(0.001));
  REQUIRE(bert.reference_gates.has_value());
  CHECK(*bert.reference_gates == 55296.0);

  const auto llama = folding_costs(32, 4096);
  REQUIRE(llama.reference_gates.has_value());
  CHECK(*llama.reference_gates == 294912.0);

  // Verifier cost is linear in depth.
  CHECK(folding_costs(24, 768).verifier_ops ==
        doctest::Approx(2.0 * bert.verifier_ops));
  CHECK_FALSE(folding_costs(12, 999).reference_gates.has_value());
}

TEST_CASE("welfare_loss three scenarios") {
  WelfareMarket market;
  market.n_agents = 1;
  market.m_tasks = 1;
  market.v_max = 1.0;
  market.sum_value_gap = 0.0;

  const auto both =
      welfare_loss(WelfareScenario::kBoth, market, Probability(0.16), 128.0);
  CHECK(std::abs(both.loss - 0.16) < 1e-30);
  CHECK(both.verification_term < 1e-38);
  CHECK(both.verification_term == doctest::Approx(2.94e-39).epsilon(0.01));

  CHECK(welfare_loss(WelfareScenario::kNoVerification, market,
                     Probability(0.5), 128.0)
            .loss == 0.0);  // all gaps zero
  CHECK(welfare_loss(WelfareScenario::kNoMechanism, market, Probability(0.0),
                     128.0)
            .loss == 0.0);
}

TEST_CASE("welfare_loss dominance on gap-heavy fixtures") {
  WelfareMarket market;
  market.n_agents = 4;
  market.m_tasks = 8;
  market.v_max = 1.0;
  market.sum_value_gap = 2.4;  // Delta >= eps n_a / m regime
  const auto both =
      welfare_loss(WelfareScenario::kBoth, market, Probability(0.05), 128.0);
  const auto no_ver = welfare_loss(WelfareScenario::kNoVerification, market,
                                   Probability(0.05), 128.0);
  const auto no_mech = welfare_loss(WelfareScenario::kNoMechanism, market,
                                    Probability(0.05), 128.0);
  CHECK(both.loss <= no_ver.loss);
  CHECK(both.loss <= no_mech.loss + 1e-12);
}

TEST_CASE("selective_alpha closed form") {
  const auto alpha = selective_alpha(Probability(0.1), 128.0,
                                     kDefaultVerificationCost);
  CHECK(alpha.value() == doctest::Approx(0.3).epsilon(1e-6));
  // kappa -> large limit is 1/(1 + cost).
  CHECK(selective_alpha(Probability(0.1), 1000.0, 3.0).value() ==
        doctest::Approx(0.25).epsilon(1e-9));
  // Free verification: verify everything.
  CHECK(selective_alpha(Probability(0.1), 128.0, 0.0).value() ==
        doctest::Approx(1.0));
  CHECK_THROWS(selective_alpha(Probability(1e-40), 128.0, 1.0));
}

TEST_CASE("run_selective matches the closed-form loss at the design point") {
  Marketplace market = unit_market();
  const auto tree = build_millipede(market);
  const auto run = run_selective(market, tree, Probability(0.16),
                                 Probability(0.3), 128.0, 100000, Seed{77},
                                 ExpBase::kTwo, 2);
  const double closed_form = 0.16 + 0.7 * 0.1;  // + 0.3 * 2^-128
  const double ci_width = run.welfare.ci_high - run.welfare.ci_low;
  CHECK(std::abs(run.mean_loss - closed_form) <= 3.0 * ci_width);
  CHECK(run.verified_fraction == doctest::Approx(0.3).epsilon(0.05));
}

TEST_CASE("run_selective limit cases") {
  Marketplace market = unit_market();
  const auto tree = build_millipede(market);
  // Full verification with strong soundness: only the mechanism term bites.
  const auto full = run_selective(market, tree, Probability(0.16),
                                  Probability(1.0), 128.0, 50000, Seed{78});
  CHECK(full.mean_loss == doctest::Approx(0.16).epsilon(0.05));
  // No verification, no mechanism noise: the substitution gap shows whole.
  const auto none = run_selective(market, tree, Probability(0.0),
                                  Probability(0.0), 128.0, 50000, Seed{79});
  CHECK(none.mean_loss == doctest::Approx(0.1).epsilon(1e-9));
}

TEST_CASE("exp_base_negative_kappa conventions") {
  CHECK(exp_base_negative_kappa(128.0, ExpBase::kTwo) ==
        doctest::Approx(2.9387e-39).epsilon(0.001));
  CHECK(exp_base_negative_kappa(128.0, ExpBase::kNatural) ==
        doctest::Approx(std::exp(-128.0)).epsilon(1e-12));
}
