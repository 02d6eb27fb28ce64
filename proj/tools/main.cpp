// Command-line frontend: calculators for every module, config-driven
// scenario runs with reproducible manifests, the sixteen-entry catalogue and
// CSV/JSON emission.
//
// Exit codes: 0 ok, 2 config/usage error, 3 infeasible scenario,
// 4 acceptance failures in `report`.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "speclab/adaptation.hpp"
#include "speclab/bandit.hpp"
#include "speclab/catalogue.hpp"
#include "speclab/chain.hpp"
#include "speclab/compose.hpp"
#include "speclab/core.hpp"
#include "speclab/grounding.hpp"
#include "speclab/horizon.hpp"
#include "speclab/kg.hpp"
#include "speclab/mechanism.hpp"
#include "speclab/parallel.hpp"
#include "speclab/stopping.hpp"
#include "speclab/trust.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace speclab;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string fmt12(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.12g", v);
  return buffer;
}

struct CliError : std::runtime_error {
  int code;
  explicit CliError(int c, const std::string& message)
      : std::runtime_error(message), code(c) {}
};

fs::path output_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("SPECLAB_OUT")) return env;
  return fs::current_path();
}

void write_text(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path().empty() ? fs::path(".")
                                                    : path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CliError(2, "cannot write " + path.string());
  out << content;
}

void reject_unknown_keys(const json& config, const std::set<std::string>& allowed,
                         const std::string& scenario) {
  for (const auto& [key, value] : config.items()) {
    if (!allowed.count(key))
      throw CliError(2, "config key '" + key + "' is not understood by the '" +
                            scenario + "' scenario");
  }
}

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CliError(2, "config file not found: " + path);
  json config;
  try {
    in >> config;
  } catch (const std::exception& e) {
    throw CliError(2, std::string("config parse error: ") + e.what());
  }
  // A manifest embeds the resolved config; accept it directly for replay.
  if (config.contains("config") && config.contains("command"))
    return config["config"];
  return config;
}

json make_manifest(const std::string& command, const json& resolved,
                   std::uint64_t master_seed) {
  json manifest;
  manifest["command"] = command;
  manifest["config"] = resolved;
  manifest["master_seed"] = master_seed;
  manifest["version"] = kVersion;
  manifest["timestamp_utc"] =
      std::chrono::duration_cast<std::chrono::seconds>(
          std::chrono::system_clock::now().time_since_epoch())
          .count();
  return manifest;
}

json report_to_json(const SimReport& report) {
  return json{{"estimate", report.estimate},
              {"ci_low", report.ci_low},
              {"ci_high", report.ci_high},
              {"trials", report.trials},
              {"master_seed", report.master_seed.value}};
}

// ---------------------------------------------------------------------------
// Scenario runners
// ---------------------------------------------------------------------------

struct RunContext {
  json config;
  fs::path out;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

void run_chain_grid(const RunContext& ctx) {
  reject_unknown_keys(ctx.config,
                      {"scenario", "seed", "threads", "grid_n", "grid_eps",
                       "trials", "k"},
                      "chain_grid");
  const auto grid_n = ctx.config.value("grid_n", std::vector<std::uint64_t>{
                                                     2, 5, 10, 15, 20});
  const auto grid_eps = ctx.config.value(
      "grid_eps", std::vector<double>{0.01, 0.03, 0.05, 0.1});
  const auto trials = ctx.config.value("trials", std::uint64_t{100000});
  const auto k = ctx.config.value("k", std::uint32_t{0});

  std::string csv = "n,eps,estimate,ci_low,ci_high,bound,rel_err\n";
  json checks = json::array();
  std::uint64_t cell = 0;
  for (const auto n : grid_n) {
    for (const double eps : grid_eps) {
      const Seed cell_seed = derive_trial_seed(Seed{ctx.seed}, cell++);
      const auto report = chain::simulate_chain(n, Probability(eps), k, trials,
                                                cell_seed, ctx.threads);
      const double bound =
          k == 0 ? chain::chain_error_bound(n, Probability(eps)).value()
                 : chain::exact_majority_chain_error(n, Probability(eps), k);
      const double rel_err =
          bound > 0.0 ? std::abs(report.estimate - bound) / bound : 0.0;
      csv += fmt12(static_cast<double>(n)) + "," + fmt12(eps) + "," +
             fmt12(report.estimate) + "," + fmt12(report.ci_low) + "," +
             fmt12(report.ci_high) + "," + fmt12(bound) + "," +
             fmt12(rel_err) + "\n";
      checks.push_back({{"n", n},
                        {"eps", eps},
                        {"rel_err", rel_err},
                        {"in_scope", static_cast<double>(n) * eps < 1.0}});
    }
  }
  write_text(ctx.out / "chain_grid.csv", csv);
  json result;
  result["cells"] = checks;
  result["tolerance_rel"] = 0.05;
  write_text(ctx.out / "chain_grid_result.json", result.dump(2) + "\n");
}

void run_stopping_scenario(const RunContext& ctx) {
  reject_unknown_keys(ctx.config,
                      {"scenario", "seed", "threads", "transient", "gamma",
                       "lean", "lambda", "ema", "n_max", "trials", "horizon",
                       "dump_trials"},
                      "stopping");
  const auto transient = ctx.config.value("transient", std::uint32_t{18});
  const double gamma = ctx.config.value("gamma", 0.3);
  const double lean = ctx.config.value("lean", 0.65);
  chain::StoppingConfig config;
  config.lambda = Probability(ctx.config.value("lambda", 0.025));
  config.ema_coeff = Probability(ctx.config.value("ema", 0.3));
  config.gamma_hat = Probability(gamma);
  config.n_max = ctx.config.value("n_max", std::uint32_t{100});
  const auto trials = ctx.config.value("trials", std::uint64_t{20000});
  const auto horizon = ctx.config.value("horizon", std::uint32_t{100});
  const auto dump_trials = ctx.config.value("dump_trials", std::uint64_t{100});

  const auto model =
      chain::make_planted_gap_chain(transient, Probability(gamma), lean);
  std::vector<chain::TrajectoryRow> rows;
  const auto run = chain::run_stopping(model, config, trials, Seed{ctx.seed},
                                       ctx.threads, nullptr);
  chain::run_stopping(model, config, dump_trials, Seed{ctx.seed}, 1, &rows);
  const double oracle = chain::stopping_oracle(model, config.lambda, horizon);

  std::string csv = "trial,step,state,entropy,smoothed_entropy,stopped\n";
  for (const auto& row : rows) {
    csv += std::to_string(row.trial) + "," + std::to_string(row.step) + "," +
           std::to_string(row.state) + "," + fmt12(row.entropy) + "," +
           fmt12(row.smoothed_entropy) + "," +
           (row.stopped ? "1" : "0") + "\n";
  }
  write_text(ctx.out / "stopping.csv", csv);

  json result;
  result["mean_loss"] = run.mean_loss;
  result["mean_tau"] = run.mean_tau;
  result["accuracy"] = report_to_json(run.accuracy);
  result["oracle_loss"] = oracle;
  result["h_star"] = chain::entropy_threshold(config.lambda, config.gamma_hat);
  result["mixing_time_proxy"] =
      chain::mixing_time_proxy(model, Probability(gamma));
  write_text(ctx.out / "stopping_result.json", result.dump(2) + "\n");
}

void run_collapse_scenario(const RunContext& ctx) {
  reject_unknown_keys(ctx.config,
                      {"scenario", "seed", "threads", "dim", "n_per_gen",
                       "generations", "mode", "rho", "seeds"},
                      "collapse");
  adaptation::CollapseConfig cfg;
  cfg.dim = ctx.config.value("dim", std::uint32_t{8});
  cfg.d_eff = cfg.dim;
  cfg.n_per_gen = ctx.config.value("n_per_gen", std::uint32_t{500});
  cfg.generations = ctx.config.value("generations", std::uint32_t{100});
  cfg.n0 = cfg.n_per_gen;
  const std::string mode = ctx.config.value("mode", std::string("replacement"));
  if (mode == "accumulation") {
    cfg.mode = adaptation::CollapseMode::kAccumulation;
    cfg.rho = Probability(ctx.config.value("rho", 0.05));
  } else if (mode != "replacement") {
    throw CliError(2, "collapse mode must be replacement or accumulation");
  }
  const auto seeds = ctx.config.value("seeds", std::uint64_t{20});

  std::vector<std::vector<adaptation::CollapsePoint>> all(seeds);
  parallel_for(seeds, ctx.threads, [&](std::size_t s) {
    all[s] = adaptation::simulate_collapse(
        cfg, derive_trial_seed(Seed{ctx.seed}, s));
  });

  std::string csv = "seed,generation,kl\n";
  std::vector<double> mean(cfg.generations + 1, 0.0);
  for (std::uint64_t s = 0; s < seeds; ++s) {
    for (const auto& point : all[s]) {
      csv += std::to_string(s) + "," + std::to_string(point.generation) + "," +
             fmt12(point.kl_to_p0) + "\n";
      mean[point.generation] += point.kl_to_p0 / static_cast<double>(seeds);
    }
  }
  write_text(ctx.out / ("collapse_" + mode + ".csv"), csv);

  json result;
  result["mode"] = mode;
  result["mean_kl"] = mean;
  result["sup_mean_kl"] = *std::max_element(mean.begin(), mean.end());
  if (cfg.mode == adaptation::CollapseMode::kAccumulation)
    result["ceiling"] = adaptation::accumulation_ceiling(
        cfg.d_eff, cfg.rho, cfg.n0);
  write_text(ctx.out / ("collapse_" + mode + "_result.json"),
             result.dump(2) + "\n");
}

void run_preference_scenario(const RunContext& ctx) {
  reject_unknown_keys(ctx.config,
                      {"scenario", "seed", "threads", "n_items", "gamma",
                       "adversarial", "delta", "trials", "sample_cap"},
                      "preference");
  const auto sizes = ctx.config.value("n_items", std::vector<std::uint32_t>{
                                                     10, 20});
  const double gamma = ctx.config.value("gamma", 0.1);
  const bool adversarial = ctx.config.value("adversarial", true);
  const double delta = ctx.config.value("delta", 0.012);
  const auto trials = ctx.config.value("trials", std::uint64_t{50});
  const auto cap = ctx.config.value("sample_cap", std::uint64_t{16000000});

  std::string csv = "n,gamma,median_samples,iqr\n";
  json medians = json::array();
  for (const auto n : sizes) {
    adaptation::PrefProblem problem;
    problem.n_items = n;
    problem.gap = delta;
    problem.gamma = Probability(gamma);
    const auto out = adaptation::simulate_preference(
        problem, adversarial, trials, Seed{ctx.seed}, ctx.threads, cap);
    csv += std::to_string(n) + "," + fmt12(gamma) + "," +
           fmt12(out.median_samples) + "," + fmt12(out.iqr) + "\n";
    medians.push_back({{"n", n},
                       {"median_samples", out.median_samples},
                       {"iqr", out.iqr},
                       {"censored", out.censored_trials}});
  }
  write_text(ctx.out / "preference.csv", csv);
  json result;
  result["gamma"] = gamma;
  result["adversarial"] = adversarial;
  result["medians"] = medians;
  write_text(ctx.out / "preference_result.json", result.dump(2) + "\n");
}

void run_bandit_scenario(const RunContext& ctx) {
  reject_unknown_keys(ctx.config,
                      {"scenario", "seed", "threads", "theta", "sigma",
                       "horizons", "delta", "seeds"},
                      "bandit");
  grounding::BanditEnv env;
  const auto theta = ctx.config.value(
      "theta", std::vector<double>{0.4, -0.5, 0.3, -0.1});
  if (theta.size() != 4) throw CliError(2, "bandit theta needs 4 entries");
  std::copy(theta.begin(), theta.end(), env.theta_true.begin());
  env.noise_sigma = ctx.config.value("sigma", 0.25);
  const auto horizons = ctx.config.value(
      "horizons", std::vector<std::uint64_t>{250, 1000, 4000});
  const double delta = ctx.config.value("delta", 0.05);
  const auto seeds = ctx.config.value("seeds", std::uint64_t{30});

  json per_horizon = json::array();
  std::string csv = "step,action,reward,regret\n";
  for (const auto horizon : horizons) {
    env.horizon = horizon;
    std::vector<double> finals(seeds, 0.0);
    parallel_for(seeds, ctx.threads, [&](std::size_t s) {
      const auto run = grounding::run_bandit_retrieval(
          env, Probability(delta), derive_trial_seed(Seed{ctx.seed}, s));
      finals[s] = run.cumulative_regret.back();
    });
    double mean = 0.0;
    for (double f : finals) mean += f;
    mean /= static_cast<double>(seeds);
    per_horizon.push_back(
        {{"horizon", horizon},
         {"mean_final_regret", mean},
         {"envelope",
          grounding::regret_bound(horizon, 4, Probability(delta))}});
    if (horizon == horizons.back()) {
      const auto trace_run = grounding::run_bandit_retrieval(
          env, Probability(delta), derive_trial_seed(Seed{ctx.seed}, 0), true);
      for (const auto& row : trace_run.trace)
        csv += std::to_string(row.step) + "," +
               (row.retrieved ? "1" : "0") + "," + fmt12(row.reward) + "," +
               fmt12(row.cumulative_regret) + "\n";
    }
  }
  write_text(ctx.out / "bandit.csv", csv);
  json result;
  result["per_horizon"] = per_horizon;
  write_text(ctx.out / "bandit_result.json", result.dump(2) + "\n");
}

trust::Marketplace parse_market(const json& spec) {
  trust::Marketplace market;
  market.n_agents = spec.at("n_agents").get<std::uint32_t>();
  market.m_tasks = spec.at("m_tasks").get<std::uint32_t>();
  market.values = spec.at("values").get<std::vector<double>>();
  market.competence = spec.at("competence").get<std::vector<double>>();
  market.substitution_gap =
      spec.at("substitution_gap").get<std::vector<double>>();
  if (spec.contains("budgets"))
    market.budgets = spec.at("budgets").get<std::vector<double>>();
  if (spec.contains("cost"))
    market.cost = spec.at("cost").get<std::vector<double>>();
  market.validate();
  return market;
}

void run_marketplace_scenario(const RunContext& ctx) {
  reject_unknown_keys(ctx.config,
                      {"scenario", "seed", "threads", "market", "eps1",
                       "sigma_pi", "trials", "sigma_ratio_limit"},
                      "marketplace");
  const auto market = parse_market(ctx.config.at("market"));
  const double eps1 = ctx.config.value("eps1", 0.0);
  const double sigma_pi = ctx.config.value("sigma_pi", 0.0);
  const double limit = ctx.config.value("sigma_ratio_limit", 0.05);
  const auto trials = ctx.config.value("trials", std::uint64_t{10000});

  trust::MechanismTree tree;
  try {
    tree = trust::build_millipede(market, sigma_pi, limit);
  } catch (const trust::GuardTripped& e) {
    throw CliError(3, e.what());
  } catch (const trust::NegativeMargin& e) {
    throw CliError(3, e.what());
  }
  std::vector<trust::AgentModel> agents(market.n_agents);
  for (auto& agent : agents) {
    agent.eps1 = Probability(eps1);
    agent.prompt_shift = sigma_pi;
  }
  const auto run = trust::run_marketplace(tree, market, agents, trials,
                                          Seed{ctx.seed}, ctx.threads);
  write_text(ctx.out / "marketplace_tree.txt", tree.dump());
  json result;
  result["greedy_welfare"] = tree.greedy_welfare;
  result["delta_min"] = tree.delta_min;
  result["mean_welfare"] = run.welfare;
  result["violation_rate"] = report_to_json(run.violation_rate);
  result["nodes"] = tree.nodes.size();
  write_text(ctx.out / "marketplace_result.json", result.dump(2) + "\n");
}

void run_selective_scenario(const RunContext& ctx) {
  reject_unknown_keys(ctx.config,
                      {"scenario", "seed", "threads", "market", "eps", "alpha",
                       "kappa", "trials", "base"},
                      "selective");
  const auto market = parse_market(ctx.config.at("market"));
  const double eps = ctx.config.value("eps", 0.16);
  const double alpha = ctx.config.value("alpha", 0.3);
  const double kappa = ctx.config.value("kappa", 128.0);
  const auto trials = ctx.config.value("trials", std::uint64_t{100000});
  const std::string base_name = ctx.config.value("base", std::string("two"));
  const auto base =
      base_name == "natural" ? trust::ExpBase::kNatural : trust::ExpBase::kTwo;

  const auto tree = trust::build_millipede(market);
  const auto run =
      trust::run_selective(market, tree, Probability(eps), Probability(alpha),
                           kappa, trials, Seed{ctx.seed}, base, ctx.threads);
  json result;
  result["ideal_welfare"] = run.ideal_welfare;
  result["mean_loss"] = run.mean_loss;
  result["verified_fraction"] = run.verified_fraction;
  result["welfare"] = report_to_json(run.welfare);
  write_text(ctx.out / "selective_result.json", result.dump(2) + "\n");
}

void run_design_plan_scenario(const RunContext& ctx) {
  reject_unknown_keys(ctx.config,
                      {"scenario", "seed", "threads", "L", "d", "c_hat",
                       "depth", "eps", "target_error", "m_req", "n_req",
                       "n_train", "lambda", "gamma_hat", "non_redundant"},
                      "design_plan");
  horizon::ArchProfile arch;
  arch.layers = ctx.config.value("L", std::uint32_t{32});
  arch.width = ctx.config.value("d", std::uint32_t{4096});
  arch.c_hat = ctx.config.value("c_hat", 2.74);
  horizon::TaskProfile task;
  task.depth = ctx.config.value("depth", 15.0);
  task.per_step_error = Probability(ctx.config.value("eps", 0.05));
  task.target_error = Probability(ctx.config.value("target_error", 0.05));
  task.m_req = ctx.config.value("m_req", std::uint32_t{1});
  task.n_req = ctx.config.value("n_req", std::uint32_t{1});
  task.n_train = ctx.config.value("n_train", std::uint32_t{1});
  horizon::DesignPlanConfig config;
  config.lambda = Probability(ctx.config.value("lambda", 0.025));
  config.gamma_hat = Probability(ctx.config.value("gamma_hat", 0.3));
  config.non_redundant = ctx.config.value("non_redundant", true);

  const auto plan = horizon::design_plan(arch, task, config);
  json result;
  result["d_star"] = plan.d_star;
  result["regime"] = plan.regime == horizon::Regime::kChainOfThought
                         ? "chain_of_thought"
                         : plan.regime ==
                               horizon::Regime::kKRedundantVerification
                             ? "k_redundant_verification"
                             : "tool_delegation";
  result["k_star"] = plan.k_star;
  result["n_star"] = plan.n_star;
  result["h_star"] = plan.h_star;
  result["supervision"] =
      plan.supervision == horizon::Supervision::kProcess ? "process"
                                                         : "outcome";
  result["strategy_exponent"] = plan.strategy_exponent;
  result["advisory_only"] = plan.advisory_only;
  result["clc"] = horizon::clc_ratio(task, plan.d_star).ratio;
  write_text(ctx.out / "design_plan_result.json", result.dump(2) + "\n");
}

void run_kg_scenario(const RunContext& ctx) {
  reject_unknown_keys(ctx.config,
                      {"scenario", "seed", "threads", "kg_file", "head",
                       "relation", "L", "p", "rank_cutoff", "radius_check"},
                      "kg_vote");
  const auto kg = grounding::load_kg(ctx.config.at("kg_file"));
  const grounding::Query query{ctx.config.at("head"),
                               ctx.config.at("relation")};
  const auto l = ctx.config.value("L", std::uint32_t{100});
  const double p = ctx.config.value("p", 0.7);
  const auto cutoff = ctx.config.value("rank_cutoff", std::uint32_t{1});

  const auto outcome = grounding::kg_vote(kg, query, l, Probability(p), cutoff,
                                          Seed{ctx.seed}, ctx.threads);
  // Conservative certification uses the lower Wilson endpoint for p_A.
  const auto radius = grounding::certified_radius(
      Probability(outcome.report.ci_low), Probability(p));
  json result;
  result["prediction"] = outcome.prediction;
  result["p_a"] = outcome.p_a.value();
  result["report"] = report_to_json(outcome.report);
  result["certified_radius"] = radius.radius;
  result["certificate_vacuous"] = radius.vacuous;
  if (ctx.config.value("radius_check", false)) {
    result["oracle_confirms"] = grounding::radius_oracle(
        kg, query, Probability(p), radius.radius, cutoff);
  }
  write_text(ctx.out / "kg_vote_result.json", result.dump(2) + "\n");
}

int cmd_run(const std::string& config_path, const std::string& out_flag,
            std::optional<std::uint64_t> seed_override, unsigned threads) {
  json config = load_config(config_path);
  if (!config.contains("scenario"))
    throw CliError(2, "config must name a scenario");
  RunContext ctx;
  ctx.config = config;
  ctx.out = output_dir(out_flag);
  ctx.seed = seed_override.value_or(
      config.value("seed", std::uint64_t{20240809}));
  ctx.config["seed"] = ctx.seed;
  ctx.threads = threads > 0
                    ? threads
                    : config.value("threads", std::uint32_t{1});
  ctx.config["threads"] = ctx.threads;

  const std::string scenario = config.at("scenario");
  fs::create_directories(ctx.out);
  if (scenario == "chain_grid")
    run_chain_grid(ctx);
  else if (scenario == "stopping")
    run_stopping_scenario(ctx);
  else if (scenario == "collapse")
    run_collapse_scenario(ctx);
  else if (scenario == "preference")
    run_preference_scenario(ctx);
  else if (scenario == "bandit")
    run_bandit_scenario(ctx);
  else if (scenario == "marketplace")
    run_marketplace_scenario(ctx);
  else if (scenario == "selective")
    run_selective_scenario(ctx);
  else if (scenario == "design_plan")
    run_design_plan_scenario(ctx);
  else if (scenario == "kg_vote")
    run_kg_scenario(ctx);
  else
    throw CliError(2, "unknown scenario: " + scenario);

  const json manifest = make_manifest("run", ctx.config, ctx.seed);
  write_text(ctx.out / (scenario + "_manifest.json"), manifest.dump(2) + "\n");
  return 0;
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

int cmd_report(const std::string& dir) {
  const fs::path root(dir);
  if (!fs::exists(root)) throw CliError(2, "no such directory: " + dir);

  bool found_any = false;
  std::uint64_t failures = 0;
  std::printf("%-28s %-18s %-12s %s\n", "source", "cell", "value", "status");

  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.path().filename() == "chain_grid.csv") {
      found_any = true;
      std::ifstream in(entry.path());
      std::string line;
      std::getline(in, line);  // header
      while (std::getline(in, line)) {
        double n, eps, estimate, lo, hi, bound, rel;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf,%lf", &n, &eps,
                        &estimate, &lo, &hi, &bound, &rel) != 7)
          continue;
        if (n * eps >= 1.0) {
          std::printf("%-28s n=%-3.0f eps=%-8.4g %-12s %s\n", "chain_grid",
                      n, eps, fmt12(rel).c_str(), "skip (n*eps >= 1)");
          continue;
        }
        const bool ok = rel <= 0.05;
        if (!ok) ++failures;
        std::printf("%-28s n=%-3.0f eps=%-8.4g %-12s %s\n", "chain_grid", n,
                    eps, fmt12(rel).c_str(), ok ? "pass" : "FAIL");
      }
    }
    if (entry.path().filename() == "stopping_result.json") {
      found_any = true;
      std::ifstream in(entry.path());
      json result;
      in >> result;
      const double rule = result.at("mean_loss");
      const double oracle = result.at("oracle_loss");
      const double lambda_tmix =
          0.025 * result.value("mixing_time_proxy", 10.0);
      const bool ok = rule <= oracle + lambda_tmix + 0.05;
      if (!ok) ++failures;
      std::printf("%-28s %-18s %-12s %s\n", "stopping", "rule vs oracle",
                  fmt12(rule - oracle).c_str(), ok ? "pass" : "FAIL");
    }
    if (entry.path().filename() == "bandit_result.json") {
      found_any = true;
      std::ifstream in(entry.path());
      json result;
      in >> result;
      for (const auto& row : result.at("per_horizon")) {
        const double mean = row.at("mean_final_regret");
        const double envelope = row.at("envelope");
        const bool ok = mean <= envelope;
        if (!ok) ++failures;
        std::printf("%-28s T=%-16s %-12s %s\n", "bandit",
                    std::to_string(row.at("horizon").get<std::uint64_t>())
                        .c_str(),
                    fmt12(mean).c_str(), ok ? "pass" : "FAIL");
      }
    }
  }
  if (!found_any)
    throw CliError(2, "directory contains no recognised result files");
  if (failures > 0) {
    std::printf("%llu check(s) failed\n",
                static_cast<unsigned long long>(failures));
    return 4;
  }
  std::printf("all checks passed\n");
  return 0;
}

// ---------------------------------------------------------------------------
// catalogue
// ---------------------------------------------------------------------------

int cmd_catalogue(std::optional<int> spec_filter, const catalogue::LiveParams&
                      params, bool as_json) {
  json rows_json = json::array();
  for (const auto& row : catalogue::rows()) {
    if (spec_filter && row.id != *spec_filter) continue;
    const auto live = catalogue::live_boundary(row.id, params);
    if (as_json) {
      json entry{{"id", row.id},
                 {"name", row.name},
                 {"boundary", row.boundary},
                 {"violation_cost", row.violation_cost},
                 {"design_rule", row.design_rule}};
      if (live) entry["boundary_value"] = *live;
      rows_json.push_back(entry);
    } else {
      std::printf("S%-3d %-26s %s\n", row.id, row.name, row.boundary);
      if (live) std::printf("     boundary value: %s\n", fmt12(*live).c_str());
      std::printf("     cost: %s\n     rule: %s\n", row.violation_cost,
                  row.design_rule);
    }
  }
  if (as_json) {
    json doc;
    doc["specifications"] = rows_json;
    doc["count"] = rows_json.size();
    std::printf("%s\n", doc.dump(2).c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"executable impossibility-specification calculators"};
  app.require_subcommand(1);

  // catalogue ---------------------------------------------------------------
  auto* cat = app.add_subcommand("catalogue", "print the sixteen-row catalogue");
  int spec_id = 0;
  bool cat_json = false;
  std::uint32_t cat_layers = 0, cat_width = 0, cat_stages = 0;
  double cat_depth = 0, cat_eps = 0, cat_pa = 0, cat_p = 0;
  cat->add_option("--spec", spec_id, "restrict to one specification id");
  cat->add_flag("--json", cat_json, "machine-readable output");
  cat->add_option("--L", cat_layers, "layer count for live boundaries");
  cat->add_option("--d", cat_width, "width for live boundaries");
  cat->add_option("--depth", cat_depth, "reasoning depth / item count");
  cat->add_option("--eps", cat_eps, "per-step error");
  cat->add_option("--p-a", cat_pa, "vote fraction");
  cat->add_option("--retention", cat_p, "subgraph retention");
  cat->add_option("--stages", cat_stages, "pipeline stages");

  // quick calculators ---------------------------------------------------------
  auto* hor = app.add_subcommand("horizon", "depth rules for an architecture");
  std::uint32_t hor_l = 32, hor_d = 4096;
  double hor_chat = 2.74, hor_depth = -1.0;
  hor->add_option("--L", hor_l, "layers")->required();
  hor->add_option("--d", hor_d, "width")->required();
  hor->add_option("--c-hat", hor_chat, "calibration constant");
  hor->add_option("--depth", hor_depth, "task depth to classify");

  auto* chn = app.add_subcommand("chain", "reliability bounds for a chain");
  std::uint64_t chn_n = 10;
  double chn_eps = 0.05, chn_delta = 0.1;
  std::uint32_t chn_k = 2;
  chn->add_option("--n", chn_n, "chain length")->required();
  chn->add_option("--eps", chn_eps, "per-step error")->required();
  chn->add_option("--delta", chn_delta, "target error");
  chn->add_option("--k", chn_k, "verification level");

  auto* stp = app.add_subcommand("stop", "entropy-threshold stopping numbers");
  double stp_lambda = 0.025, stp_gamma = 0.3;
  stp->add_option("--lambda", stp_lambda, "per-step cost");
  stp->add_option("--gamma", stp_gamma, "spectral gap estimate");

  auto* adp = app.add_subcommand("adapt", "adaptation calculators");
  std::uint64_t adp_d = 4096;
  double adp_alpha = 2.1, adp_c = 1.10, adp_eta = 0.87, adp_tau = 0.1;
  std::uint32_t adp_layers = 1;
  adp->add_option("--d", adp_d, "model width");
  adp->add_option("--alpha", adp_alpha, "superposition ratio");
  adp->add_option("--c", adp_c, "key correlation constant");
  adp->add_option("--eta", adp_eta, "mean edit magnitude");
  adp->add_option("--tau", adp_tau, "locality tolerance");
  adp->add_option("--layers", adp_layers, "edited layers");

  auto* grd = app.add_subcommand("ground", "grounding calculators");
  double grd_pa = 0.92, grd_p = 0.7, grd_eps = 0.10;
  std::uint32_t grd_k = 5;
  grd->add_option("--p-a", grd_pa, "vote fraction");
  grd->add_option("--retention", grd_p, "subgraph retention");
  grd->add_option("--stages", grd_k, "pipeline stages");
  grd->add_option("--eps-stage", grd_eps, "per-stage error");

  auto* tru = app.add_subcommand("trust", "trust calculators");
  double tru_eps1 = 0.138, tru_sigma = 0.0436, tru_dmin = 1.0;
  std::uint64_t tru_T = 10;
  tru->add_option("--eps1", tru_eps1, "within-horizon irrationality");
  tru->add_option("--sigma-pi", tru_sigma, "prompt shift magnitude");
  tru->add_option("--delta-min", tru_dmin, "minimum margin");
  tru->add_option("--info-sets", tru_T, "information sets");

  auto* cmp = app.add_subcommand("compose", "composition calculators");
  double cmp_n = 12, cmp_eps = 0.03, cmp_q = 0.8, cmp_eta = 0.7;
  cmp->add_option("--n", cmp_n, "reasoning depth");
  cmp->add_option("--eps", cmp_eps, "per-step error");
  cmp->add_option("--q", cmp_q, "retrieval quality");
  cmp->add_option("--eta", cmp_eta, "retention factor");

  // run / report --------------------------------------------------------------
  auto* run = app.add_subcommand("run", "execute a scenario config");
  std::string run_config, run_out;
  std::uint64_t run_seed = 0;
  bool run_seed_set = false;
  unsigned run_threads = 0;
  run->add_option("--config", run_config, "scenario config or manifest")
      ->required();
  run->add_option("--out", run_out, "output directory (default $SPECLAB_OUT)");
  run->add_option("--seed", run_seed, "master seed override")
      ->each([&](const std::string&) { run_seed_set = true; });
  run->add_option("--threads", run_threads, "worker threads");

  auto* rep = app.add_subcommand("report", "summarise prior outputs");
  std::string rep_dir;
  rep->add_option("--dir", rep_dir, "results directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (cat->parsed()) {
      catalogue::LiveParams params;
      if (cat_layers) params.layers = cat_layers;
      if (cat_width) params.width = cat_width;
      if (cat_depth > 0) params.depth = cat_depth;
      if (cat_eps > 0) params.eps = cat_eps;
      if (cat_pa > 0) params.p_a = cat_pa;
      if (cat_p > 0) params.retention_p = cat_p;
      if (cat_stages) params.k_stages = cat_stages;
      return cmd_catalogue(
          spec_id > 0 ? std::optional<int>(spec_id) : std::nullopt, params,
          cat_json);
    }
    if (hor->parsed()) {
      const double d_star = horizon::horizon_predict({hor_l, hor_d, hor_chat});
      json out{{"d_star", d_star}};
      if (hor_depth > 0) {
        const auto regime = horizon::regime_classify(hor_depth, d_star);
        out["regime"] = regime == horizon::Regime::kChainOfThought
                            ? "chain_of_thought"
                            : regime ==
                                  horizon::Regime::kKRedundantVerification
                                ? "k_redundant_verification"
                                : "tool_delegation";
        out["decay_bound"] =
            horizon::decay_bound(hor_depth, d_star, hor_l, hor_d).value();
      }
      std::printf("%s\n", out.dump(2).c_str());
      return 0;
    }
    if (chn->parsed()) {
      json out;
      out["error_bound"] =
          chain::chain_error_bound(chn_n, Probability(chn_eps)).value();
      out["safe_length"] =
          chain::safe_length(Probability(chn_eps), Probability(chn_delta));
      out["k_redundant_bound"] =
          chain::kredundant_bound(chn_n, Probability(chn_eps), chn_k)
              .value.value();
      out["k_redundant_safe_length"] = chain::kredundant_safe_length(
          Probability(chn_eps), Probability(chn_delta), chn_k);
      out["optimal_k"] =
          chain::optimal_k(chn_n, Probability(chn_delta), Probability(chn_eps));
      std::printf("%s\n", out.dump(2).c_str());
      return 0;
    }
    if (stp->parsed()) {
      json out{{"h_star", chain::entropy_threshold(Probability(stp_lambda),
                                                   Probability(stp_gamma))}};
      std::printf("%s\n", out.dump(2).c_str());
      return 0;
    }
    if (adp->parsed()) {
      adaptation::EditConfig cfg;
      cfg.d = adp_d;
      cfg.alpha = adp_alpha;
      cfg.c = adp_c;
      cfg.eta_mag = adp_eta;
      cfg.tau = adp_tau;
      cfg.layers_edited = adp_layers;
      const auto caps = adaptation::edit_capacity(cfg);
      json out{{"k_star", caps.k_star},
               {"k_star_multilayer", caps.k_star_multilayer},
               {"interference_per_edit",
                adaptation::edit_interference(cfg, cfg.eta_mag)}};
      std::printf("%s\n", out.dump(2).c_str());
      return 0;
    }
    if (grd->parsed()) {
      const auto radius = grounding::certified_radius(Probability(grd_pa),
                                                      Probability(grd_p));
      json out{{"certified_radius", radius.radius},
               {"vacuous", radius.vacuous},
               {"attribution_floor",
                grounding::attribution_floor(grd_k, Probability(grd_eps))
                    .value()},
               {"min_metrics",
                grounding::metric_requirements(grd_k, Probability(0.1))
                    .min_metrics}};
      std::printf("%s\n", out.dump(2).c_str());
      return 0;
    }
    if (tru->parsed()) {
      trust::AgentModel agent;
      agent.eps1 = Probability(tru_eps1);
      agent.prompt_shift = tru_sigma;
      const auto eps = trust::osp_epsilon(agent, tru_T, tru_dmin);
      const auto tax = trust::nonlinearity_tax();
      json out{{"eps2", eps.eps2.value()},
               {"eps_total", eps.eps_total.value()},
               {"tax_floor", tax.floor},
               {"tax_stacked", tax.stacked},
               {"tax_headline", tax.headline}};
      std::printf("%s\n", out.dump(2).c_str());
      return 0;
    }
    if (cmp->parsed()) {
      compose::CompositionParams params;
      params.depth = cmp_n;
      params.eps = Probability(cmp_eps);
      params.retrieval_q = Probability(cmp_q);
      params.retention = Probability(cmp_eta);
      const auto attenuation = compose::marginal_attenuation(params, 5.0);
      json out{{"joint_reliability", compose::joint_reliability(params).value()},
               {"marginal_at_n", attenuation.marginal_at_n},
               {"marginal_at_shallow", attenuation.marginal_at_shallow},
               {"attenuation", attenuation.attenuation}};
      const auto crossover = compose::crossover_depth(
          params.eps, params.retention, params.retrieval_q);
      if (crossover)
        out["crossover_depth"] = *crossover;
      else
        out["crossover_depth"] = nullptr;
      std::printf("%s\n", out.dump(2).c_str());
      return 0;
    }
    if (run->parsed()) {
      return cmd_run(run_config, run_out,
                     run_seed_set ? std::optional<std::uint64_t>(run_seed)
                                  : std::nullopt,
                     run_threads);
    }
    if (rep->parsed()) return cmd_report(rep_dir);
  } catch (const CliError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
