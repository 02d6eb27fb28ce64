#include "speclab/chain.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>

#include "speclab/parallel.hpp"
#include "speclab/rng.hpp"

namespace speclab::chain {
namespace {

constexpr double kBoundSlack = 1e-9;  // relative slack at integer boundaries

void require_step_error(Probability eps) {
  if (eps.value() >= 0.5)
    throw std::invalid_argument("per-step error must be < 0.5");
}

}  // namespace

Probability chain_error_bound(std::uint64_t n, Probability eps) {
  require_step_error(eps);
  if (n == 0) throw std::invalid_argument("chain_error_bound: n >= 1");
  return Probability(-std::expm1(static_cast<double>(n) *
                                 std::log1p(-eps.value())));
}

std::uint64_t safe_length(Probability eps, Probability delta) {
  require_step_error(eps);
  if (!(eps.value() > 0.0))
    throw std::invalid_argument("safe_length: eps > 0");
  if (!(delta.value() > 0.0 && delta.value() < 1.0))
    throw std::invalid_argument("safe_length: delta in (0,1)");
  const double raw = std::log1p(-delta.value()) / std::log1p(-eps.value());
  auto n = static_cast<std::uint64_t>(std::floor(raw * (1.0 + kBoundSlack)));
  // +-1 adjustment so the returned value is the exact argmax of the bound
  // predicate regardless of floating dust.
  auto ok = [&](std::uint64_t m) {
    return m == 0 || chain_error_bound(m, eps).value() <=
                         delta.value() * (1.0 + kBoundSlack);
  };
  while (!ok(n)) --n;
  while (ok(n + 1)) ++n;
  return n;
}

Probability fano_lower_bound(std::uint64_t n, Probability eps,
                             std::uint64_t answer_space) {
  if (n == 0) throw std::invalid_argument("fano_lower_bound: n >= 1");
  if (answer_space < 2)
    throw std::invalid_argument("fano_lower_bound: |Y| >= 2");
  const double survive =
      std::exp(static_cast<double>(n) * std::log1p(-eps.value() / 2.0));
  const double value = 1.0 - survive -
                       1.0 / (static_cast<double>(n) *
                              std::log(static_cast<double>(answer_space)));
  return Probability(std::max(0.0, value));
}

ClampedBound kredundant_bound(std::uint64_t n, Probability eps,
                              std::uint32_t k) {
  if (k < 2) throw std::invalid_argument("kredundant_bound: k >= 2");
  if (n == 0) throw std::invalid_argument("kredundant_bound: n >= 1");
  const std::uint32_t majority = (k + 2) / 2;  // ceil((k+1)/2)
  double log_choose = std::lgamma(static_cast<double>(k) + 2.0) -
                      std::lgamma(static_cast<double>(majority) + 1.0) -
                      std::lgamma(static_cast<double>(k + 1 - majority) + 1.0);
  if (eps.value() == 0.0) return {Probability(0.0), false};
  const double raw =
      std::exp(log_choose + std::log(static_cast<double>(n)) +
               static_cast<double>(majority) * std::log(eps.value()));
  return clamp_to_unit(raw);
}

std::uint64_t kredundant_safe_length(Probability eps, Probability delta,
                                     std::uint32_t k) {
  if (k < 2) throw std::invalid_argument("kredundant_safe_length: k >= 2");
  if (!(delta.value() > 0.0 && delta.value() < 1.0))
    throw std::invalid_argument("kredundant_safe_length: delta in (0,1)");
  if (!(eps.value() > 0.0)) {
    throw std::invalid_argument("kredundant_safe_length: eps > 0");
  }
  const double per_step = kredundant_bound(1, eps, k).value.value();
  if (per_step <= 0.0 || per_step > 1.0)
    throw std::invalid_argument("kredundant_safe_length: degenerate bound");
  auto n =
      static_cast<std::uint64_t>(std::floor(delta.value() / per_step *
                                            (1.0 + kBoundSlack)));
  auto ok = [&](std::uint64_t m) {
    return m == 0 || kredundant_bound(m, eps, k).value.value() <=
                         delta.value() * (1.0 + kBoundSlack);
  };
  while (!ok(n)) --n;
  while (ok(n + 1)) ++n;
  return n;
}

std::uint32_t optimal_k(std::uint64_t n, Probability delta, Probability eps) {
  if (n == 0) throw std::invalid_argument("optimal_k: n >= 1");
  if (!(eps.value() > 0.0 && eps.value() < 0.5))
    throw std::invalid_argument("optimal_k: eps in (0, 0.5)");
  if (!(delta.value() > 0.0))
    throw std::invalid_argument("optimal_k: delta > 0");
  const double raw = 2.0 * std::log(static_cast<double>(n) / delta.value()) /
                         std::log(1.0 / eps.value()) -
                     1.0;
  const double k = std::ceil(raw - 1e-12);
  return k < 1.0 ? 1u : static_cast<std::uint32_t>(k);
}

double majority_step_error(Probability eps, std::uint32_t k) {
  if (k < 2) throw std::invalid_argument("majority_step_error: k >= 2");
  const std::uint32_t majority = (k + 2) / 2;
  return binom_tail(k + 1, majority, eps);
}

double exact_majority_chain_error(std::uint64_t n, Probability eps,
                                  std::uint32_t k) {
  const double p_maj = majority_step_error(eps, k);
  return -std::expm1(static_cast<double>(n) * std::log1p(-p_maj));
}

SimReport simulate_chain(std::uint64_t n, Probability eps, std::uint32_t k,
                         std::uint64_t trials, Seed seed, unsigned threads) {
  if (n == 0) throw std::invalid_argument("simulate_chain: n >= 1");
  if (k == 1)
    throw std::invalid_argument("simulate_chain: k = 1 is not a vote");
  if (trials < 100) throw std::invalid_argument("simulate_chain: trials >= 100");

  const double p = eps.value();
  const std::uint32_t candidates = k == 0 ? 1 : k + 1;
  const std::uint32_t majority = k == 0 ? 1 : (k + 2) / 2;

  std::atomic<std::uint64_t> errors{0};
  parallel_for(trials, threads, [&](std::size_t trial) {
    Rng rng(derive_trial_seed(seed, trial));
    bool failed = false;
    for (std::uint64_t step = 0; step < n && !failed; ++step) {
      std::uint32_t wrong = 0;
      for (std::uint32_t c = 0; c < candidates; ++c)
        wrong += rng.bernoulli(p) ? 1u : 0u;
      failed = wrong >= majority;
    }
    if (failed) errors.fetch_add(1, std::memory_order_relaxed);
  });
  return make_proportion_report(errors.load(), trials, seed);
}

double entropy_threshold(Probability lambda, Probability gamma) {
  if (!(lambda.value() > 0.0 && lambda.value() < 1.0))
    throw std::invalid_argument("entropy_threshold: lambda in (0,1)");
  if (!(gamma.value() > 0.0))
    throw std::invalid_argument("entropy_threshold: gamma in (0,1]");
  return lambda.value() / gamma.value() * std::log(1.0 / lambda.value());
}

double supervision_ratio(std::uint64_t n, Probability label_noise) {
  if (n < 2) throw std::invalid_argument("supervision_ratio: n >= 2");
  if (label_noise.value() >= 0.5)
    throw std::invalid_argument("supervision_ratio: eta < 0.5");
  const double base =
      static_cast<double>(n) / std::log(static_cast<double>(n));
  const double shrink = 1.0 - 2.0 * label_noise.value();
  return base * shrink * shrink;
}

double training_fraction_ratio(std::uint64_t n) {
  if (n < 2) throw std::invalid_argument("training_fraction_ratio: n >= 2");
  const double ln_n = std::log(static_cast<double>(n));
  return static_cast<double>(n) / (ln_n * ln_n);
}

StrategySpec StrategySpec::best_of_n_perfect() { return {}; }

StrategySpec StrategySpec::best_of_n_imperfect(Probability verifier_error) {
  StrategySpec s;
  s.kind = Kind::kBestOfNImperfect;
  s.verifier_error = verifier_error.value();
  return s;
}

StrategySpec StrategySpec::beam(std::uint32_t width) {
  if (width < 2) throw std::invalid_argument("StrategySpec: beam width >= 2");
  StrategySpec s;
  s.kind = Kind::kBeam;
  s.beam_width = width;
  return s;
}

StrategySpec StrategySpec::single_chain_verified(Probability eps,
                                                 double info_per_step) {
  if (!(info_per_step > 0.0))
    throw std::invalid_argument("StrategySpec: info_per_step > 0");
  StrategySpec s;
  s.kind = Kind::kSingleChainVerified;
  s.per_step_error = eps.value();
  s.info_per_step = info_per_step;
  return s;
}

ScalingExponent scaling_exponent(const StrategySpec& strategy) {
  switch (strategy.kind) {
    case StrategySpec::Kind::kBestOfNPerfect:
      return {1.0, false};
    case StrategySpec::Kind::kBestOfNImperfect:
      if (strategy.verifier_error >= 1.0)
        throw std::invalid_argument("scaling_exponent: eps_v < 1");
      return {1.0 - strategy.verifier_error, false};
    case StrategySpec::Kind::kBeam: {
      const double b = strategy.beam_width;
      if (strategy.beam_width == 2) return {0.0, true};
      return {std::log(b - 1.0) / std::log(b), false};
    }
    case StrategySpec::Kind::kSingleChainVerified:
      return {1.0 / (1.0 + strategy.per_step_error / strategy.info_per_step),
              false};
  }
  throw std::logic_error("scaling_exponent: unknown strategy");
}

Probability success_curve(double compute, double c, double alpha) {
  if (compute < 0.0) throw std::invalid_argument("success_curve: C >= 0");
  if (!(c > 0.0) || !(alpha > 0.0))
    throw std::invalid_argument("success_curve: c, alpha > 0");
  if (compute == 0.0) return Probability(0.0);
  return Probability(-std::expm1(-c * std::pow(compute, alpha)));
}

namespace {

double fit_sse(const std::vector<std::pair<double, double>>& pts, double c,
               double alpha) {
  double sse = 0.0;
  for (const auto& [x, y] : pts) {
    const double pred = -std::expm1(-c * std::pow(x, alpha));
    const double r = y - pred;
    sse += r * r;
  }
  return sse;
}

}  // namespace

ScalingFit fit_scaling(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 4)
    throw std::invalid_argument("fit_scaling: need >= 4 points");
  {
    std::vector<double> xs;
    for (const auto& [x, y] : points) {
      if (!(x > 0.0)) throw std::invalid_argument("fit_scaling: C > 0");
      if (y < 0.0 || y > 1.0)
        throw std::invalid_argument("fit_scaling: success rate in [0,1]");
      xs.push_back(x);
    }
    std::sort(xs.begin(), xs.end());
    if (std::adjacent_find(xs.begin(), xs.end()) != xs.end())
      throw std::invalid_argument("fit_scaling: C values must be distinct");
  }

  // Closed-form initialisation: -ln(1-y) = c C^alpha is linear in logs.
  double best_c = 1.0, best_alpha = 0.5;
  double best_sse = fit_sse(points, best_c, best_alpha);
  {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t m = 0;
    for (const auto& [x, y] : points) {
      if (y <= 1e-12 || y >= 1.0 - 1e-12) continue;
      const double lx = std::log(x);
      const double ly = std::log(-std::log1p(-y));
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
      ++m;
    }
    if (m >= 2) {
      const double denom = static_cast<double>(m) * sxx - sx * sx;
      if (std::abs(denom) > 1e-12) {
        const double alpha0 = (static_cast<double>(m) * sxy - sx * sy) / denom;
        const double logc0 = (sy - alpha0 * sx) / static_cast<double>(m);
        if (alpha0 > 0.0 && std::isfinite(logc0)) {
          const double c0 = std::exp(logc0);
          const double sse = fit_sse(points, c0, alpha0);
          if (sse < best_sse) {
            best_sse = sse;
            best_c = c0;
            best_alpha = alpha0;
          }
        }
      }
    }
  }

  // Coarse grid, then shrinking coordinate search around the incumbent.
  for (double alpha = 0.05; alpha <= 1.6; alpha += 0.05) {
    for (double logc = -8.0; logc <= 4.0; logc += 0.25) {
      const double c = std::exp(logc);
      const double sse = fit_sse(points, c, alpha);
      if (sse < best_sse) {
        best_sse = sse;
        best_c = c;
        best_alpha = alpha;
      }
    }
  }
  double step_alpha = 0.05, step_logc = 0.25;
  for (int iter = 0; iter < 200; ++iter) {
    bool improved = false;
    for (const double da : {-step_alpha, step_alpha}) {
      const double alpha = best_alpha + da;
      if (alpha <= 0.0) continue;
      const double sse = fit_sse(points, best_c, alpha);
      if (sse < best_sse) {
        best_sse = sse;
        best_alpha = alpha;
        improved = true;
      }
    }
    for (const double dl : {-step_logc, step_logc}) {
      const double c = best_c * std::exp(dl);
      const double sse = fit_sse(points, c, best_alpha);
      if (sse < best_sse) {
        best_sse = sse;
        best_c = c;
        improved = true;
      }
    }
    if (!improved) {
      step_alpha *= 0.5;
      step_logc *= 0.5;
      if (step_alpha < 1e-10 && step_logc < 1e-10) break;
    }
  }

  double mean = 0.0;
  for (const auto& [x, y] : points) mean += y;
  mean /= static_cast<double>(points.size());
  double ss_tot = 0.0;
  for (const auto& [x, y] : points) ss_tot += (y - mean) * (y - mean);
  const double r2 = ss_tot > 0.0 ? 1.0 - best_sse / ss_tot : 1.0;
  return {best_c, best_alpha, r2};
}

AllocationResult allocation_optimum(double budget, double c_train,
                                    double c_infer, std::uint64_t n,
                                    double d_cot, double c) {
  if (!(budget > 0.0 && c_train > 0.0 && c_infer > 0.0 && d_cot > 0.0 &&
        c > 0.0) ||
      n == 0)
    throw std::invalid_argument("allocation_optimum: positive inputs required");

  const double load = d_cot * static_cast<double>(n);
  auto verifier_error = [&](double T) { return load * std::log(T) / T; };
  auto inference = [&](double T) { return (budget - c_train * T) / c_infer; };

  // Stationarity residual: positive once T/C exceeds the right-hand side.
  auto residual = [&](double T) {
    const double C = inference(T);
    const double eps_v = verifier_error(T);
    const double rhs = (c_infer / c_train) * load * std::log(C) /
                       (std::pow(C, 1.0 - eps_v) * c);
    return T / C - rhs;
  };

  // Feasible T: eps_v(T) < 1, C(T) > 1 (so ln C > 0), T > 1.
  const double t_max = budget / c_train;
  double lo = -1.0, hi = -1.0;
  const int kScan = 4096;
  double prev_t = -1.0, prev_r = 0.0;
  for (int i = 1; i < kScan; ++i) {
    const double T = 1.0 + (t_max - 1.0) * static_cast<double>(i) /
                               static_cast<double>(kScan);
    const double C = inference(T);
    if (!(T > 1.0) || !(C > 1.0) || verifier_error(T) >= 1.0) {
      prev_t = -1.0;
      continue;
    }
    const double r = residual(T);
    if (!std::isfinite(r)) {
      prev_t = -1.0;
      continue;
    }
    if (prev_t > 0.0 && prev_r < 0.0 && r >= 0.0) {
      lo = prev_t;
      hi = T;
      break;
    }
    prev_t = T;
    prev_r = r;
  }
  if (lo < 0.0)
    throw std::runtime_error(
        "allocation_optimum: no interior optimum; budget infeasible for "
        "these costs");

  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (residual(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  const double T = 0.5 * (lo + hi);
  return {T, inference(T), verifier_error(T)};
}

}  // namespace speclab::chain
