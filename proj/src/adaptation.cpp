#include "speclab/adaptation.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "speclab/parallel.hpp"
#include "speclab/rng.hpp"

namespace speclab::adaptation {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void LoraConfig::validate() const {
  if (adapted_matrices == 0 || rank == 0 || d == 0 || k == 0 || documents == 0)
    throw std::invalid_argument("LoraConfig: counts must be positive");
  if (!(sigma_prior > 0.0 && sigma_posterior > 0.0))
    throw std::invalid_argument("LoraConfig: sigmas must be positive");
  if (mean_norm_sq < 0.0)
    throw std::invalid_argument("LoraConfig: ||phi||^2 >= 0");
  if (!(delta.value() > 0.0 && delta.value() < 1.0))
    throw std::invalid_argument("LoraConfig: delta in (0,1)");
  if (!(loss_range > 0.0))
    throw std::invalid_argument("LoraConfig: loss range > 0");
}

std::uint64_t lora_effective_params(const LoraConfig& cfg) {
  cfg.validate();
  return cfg.adapted_matrices * cfg.rank * (cfg.d + cfg.k);
}

double lora_kl(const LoraConfig& cfg) {
  cfg.validate();
  const auto q = static_cast<double>(lora_effective_params(cfg));
  const double vp = cfg.sigma_prior * cfg.sigma_prior;
  const double vq = cfg.sigma_posterior * cfg.sigma_posterior;
  return 0.5 * (q * vq / vp + cfg.mean_norm_sq / vp - q + q * std::log(vp / vq));
}

LoraBound lora_bound(const LoraConfig& cfg, double empirical_loss,
                     Probability delta_mc, std::uint64_t mc_samples,
                     std::uint64_t k_eff, double normaliser) {
  cfg.validate();
  if (empirical_loss < 0.0)
    throw std::invalid_argument("lora_bound: empirical loss >= 0");
  if (mc_samples == 0 || k_eff == 0)
    throw std::invalid_argument("lora_bound: mc_samples, k_eff >= 1");
  if (!(delta_mc.value() > 0.0 && delta_mc.value() < 1.0))
    throw std::invalid_argument("lora_bound: delta_mc in (0,1)");
  if (!(normaliser > 0.0))
    throw std::invalid_argument("lora_bound: normaliser > 0");

  LoraBound out;
  out.kl = lora_kl(cfg);
  const auto n_docs = static_cast<double>(cfg.documents);
  const double keff = static_cast<double>(k_eff);
  out.mc_correction =
      cfg.loss_range * cfg.loss_range * cfg.sigma_posterior *
      cfg.sigma_posterior *
      std::sqrt(2.0 * keff * std::log(2.0 * keff / delta_mc.value()) /
                static_cast<double>(mc_samples));
  const double complexity = std::sqrt(
      (out.kl + std::log(2.0 * std::sqrt(n_docs) / cfg.delta.value())) /
      (2.0 * n_docs));
  out.bound = empirical_loss + out.mc_correction + complexity;
  out.vacuous = out.bound / normaliser >= 1.0;
  return out;
}

double rank_ceiling_default_c0() {
  // Pinned so (N = 52000, d + k = 12288) yields exactly 32.
  return 52000.0 / (12288.0 * std::log(52000.0) * 32.0);
}

double rank_ceiling(std::uint64_t d, std::uint64_t k, std::uint64_t documents,
                    double c0) {
  if (documents < 3) throw std::invalid_argument("rank_ceiling: N >= 3");
  if (d == 0 || k == 0) throw std::invalid_argument("rank_ceiling: d, k >= 1");
  if (c0 == 0.0) c0 = rank_ceiling_default_c0();
  if (!(c0 > 0.0)) throw std::invalid_argument("rank_ceiling: c0 > 0");
  const auto n_docs = static_cast<double>(documents);
  return n_docs /
         (c0 * static_cast<double>(d + k) * std::log(n_docs));
}

void PrefProblem::validate() const {
  if (n_items < 2) throw std::invalid_argument("PrefProblem: n >= 2");
  if (!(gap > 0.0)) throw std::invalid_argument("PrefProblem: Delta > 0");
  if (gamma.value() >= 0.5)
    throw std::invalid_argument("PrefProblem: gamma < 0.5");
}

PrefRegimeResult pref_regime(const PrefProblem& p, double c) {
  p.validate();
  if (!(c > 0.0)) throw std::invalid_argument("pref_regime: c > 0");
  PrefRegimeResult out;
  const auto n = static_cast<double>(p.n_items);
  out.gamma_star = p.gap / n;
  out.regime = p.gamma.value() > out.gamma_star ? PrefRegime::kMisspecified
                                                : PrefRegime::kWellSpecified;
  if (out.regime == PrefRegime::kWellSpecified) {
    out.budget = c * n * std::log(n) / (p.gap * p.gap);
  } else {
    out.budget = c * n * n * std::log(n) / (p.gamma.value() * p.gamma.value());
  }
  return out;
}

AlignmentAdvice dpo_rlhf_advice(Probability gamma, std::uint64_t n,
                                std::uint64_t reward_width, double c1) {
  if (n == 0) throw std::invalid_argument("dpo_rlhf_advice: n >= 1");
  if (!(c1 > 0.0)) throw std::invalid_argument("dpo_rlhf_advice: C1 > 0");
  if (gamma.value() == 0.0) return AlignmentAdvice::kEquivalent;
  const double required_width = c1 * static_cast<double>(n) / gamma.value();
  return static_cast<double>(reward_width) >= required_width
             ? AlignmentAdvice::kPreferRLHF
             : AlignmentAdvice::kComparableDegradation;
}

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Pairwise comparison probabilities Pr[i beats j] under
// (1-gamma) sigma(r_i - r_j) + gamma q_ij.
//
// The adversarial q realises the signal-cancelling construction against the
// win-count ranker: comparisons touching neither target item are pinned at
// 1/2 (clipped into [0,1]); comparisons pairing a target item with a common
// opponent are equalised across the two targets, so they carry no order
// information; the direct target comparison keeps q = 1/2, leaving
// (1-gamma)(sigma(Delta) - 1/2) of signal. Benign noise is a uniform 1/2
// mixture on every pair.
std::vector<double> preference_matrix(const PrefProblem& p, bool adversarial) {
  const std::uint32_t n = p.n_items;
  const std::uint32_t lo = n / 2 - 1, hi = n / 2;  // target adjacent pair
  std::vector<double> prob(static_cast<std::size_t>(n) * n, 0.0);
  const double g = p.gamma.value();
  auto score_gap = [&](std::uint32_t i, std::uint32_t j) {
    return (static_cast<double>(i) - static_cast<double>(j)) * p.gap;
  };
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double s = logistic(score_gap(i, j));
      double value;
      if (g == 0.0) {
        value = s;
      } else if (!adversarial) {
        value = (1.0 - g) * s + g * 0.5;
      } else {
        const bool i_target = i == lo || i == hi;
        const bool j_target = j == lo || j == hi;
        if (i_target && j_target) {
          value = (1.0 - g) * s + g * 0.5;
        } else if (i_target || j_target) {
          // Equalise the two targets against this opponent: both win with
          // the averaged probability, erasing the differential.
          const std::uint32_t opponent = i_target ? j : i;
          const double mean_s = 0.5 * (logistic(score_gap(lo, opponent)) +
                                       logistic(score_gap(hi, opponent)));
          const double target_vs_opp =
              std::clamp((mean_s - (1.0 - g) *
                                       logistic(score_gap(
                                           i_target ? i : j, opponent))) /
                             g,
                         0.0, 1.0);
          const double q = i_target ? target_vs_opp : 1.0 - target_vs_opp;
          const double s_here = s;
          value = (1.0 - g) * s_here + g * q;
        } else {
          value = (1.0 - g) * s +
                  g * std::clamp((0.5 - (1.0 - g) * s) / g, 0.0, 1.0);
        }
      }
      prob[static_cast<std::size_t>(i) * n + j] = value;
    }
  }
  return prob;
}

}  // namespace

PreferenceSimResult simulate_preference(const PrefProblem& p, bool adversarial,
                                        std::uint64_t trials, Seed seed,
                                        unsigned threads,
                                        std::uint64_t sample_cap) {
  p.validate();
  if (p.n_items > 50)
    throw std::invalid_argument("simulate_preference: n_items <= 50");
  if (trials == 0) throw std::invalid_argument("simulate_preference: trials >= 1");

  const std::uint32_t n = p.n_items;
  const std::uint32_t lo = n / 2 - 1, hi = n / 2;
  const std::vector<double> prob = preference_matrix(p, adversarial);
  const double success_target = 1.0 - p.target_error.value();  // default 2/3

  // Success-curve protocol: every trial draws a fresh comparison batch at
  // each sample-size level; the success rate over trials at a level
  // estimates Pr[win-count orders the target pair correctly]. The reported
  // sample count is the first level whose success rate reaches the target
  // and holds at the next level; median and IQR come from a seeded
  // bootstrap over trials. Per-trial early stopping is avoided on purpose:
  // it conflates lucky streaks with resolution when the signal is weak.
  std::vector<std::uint64_t> levels;
  for (double level = 50.0; level <= static_cast<double>(sample_cap);
       level = std::ceil(level * 1.3))
    levels.push_back(static_cast<std::uint64_t>(level));

  std::vector<std::vector<char>> correct(levels.size());
  std::size_t resolved_level = levels.size();
  std::size_t sustain = 0;
  for (std::size_t li = 0; li < levels.size(); ++li) {
    correct[li].assign(trials, 0);
    const std::uint64_t batch = levels[li];
    parallel_for(trials, threads, [&](std::size_t trial) {
      Rng rng(derive_trial_seed(
          seed, trial * 1000003ull + static_cast<std::uint64_t>(li)));
      std::vector<double> wins(n, 0.0);
      for (std::uint64_t s = 0; s < batch; ++s) {
        auto i = static_cast<std::uint32_t>(rng.below(n));
        auto j = static_cast<std::uint32_t>(rng.below(n));
        while (j == i) j = static_cast<std::uint32_t>(rng.below(n));
        if (rng.bernoulli(prob[static_cast<std::size_t>(i) * n + j]))
          wins[i] += 1.0;
        else
          wins[j] += 1.0;
      }
      correct[li][trial] = wins[hi] > wins[lo] ? 1 : 0;
    });
    double rate = 0.0;
    for (char c : correct[li]) rate += c;
    rate /= static_cast<double>(trials);
    if (rate >= success_target) {
      if (++sustain >= 2) {
        resolved_level = li - 1;  // first of the two sustained levels
        break;
      }
    } else {
      sustain = 0;
    }
  }

  PreferenceSimResult out;
  out.trials = trials;
  out.master_seed = seed;
  if (resolved_level >= levels.size()) {
    out.median_samples = static_cast<double>(sample_cap);
    out.iqr = 0.0;
    out.censored_trials = trials;
    return out;
  }

  // Bootstrap the crossing level over trials.
  const std::size_t measured = std::min(resolved_level + 2, correct.size());
  std::vector<double> crossings;
  Rng boot(derive_trial_seed(seed, 0x626f6f74));
  for (int b = 0; b < 101; ++b) {
    std::vector<std::uint64_t> pick(trials);
    for (auto& idx : pick)
      idx = boot.below(trials);
    std::size_t cross = measured - 1;
    std::size_t streak = 0;
    for (std::size_t li = 0; li < measured; ++li) {
      double rate = 0.0;
      for (const auto idx : pick) rate += correct[li].empty() ? 0 : correct[li][idx];
      rate /= static_cast<double>(trials);
      if (rate >= success_target) {
        if (++streak >= 2) {
          cross = li - 1;
          break;
        }
      } else {
        streak = 0;
      }
    }
    crossings.push_back(static_cast<double>(levels[cross]));
  }
  std::sort(crossings.begin(), crossings.end());
  out.median_samples = crossings[crossings.size() / 2];
  out.iqr = crossings[(crossings.size() * 3) / 4] -
            crossings[crossings.size() / 4];
  return out;
}

void CollapseConfig::validate() const {
  if (dim == 0 || dim > 64)
    throw std::invalid_argument("CollapseConfig: dim in [1, 64]");
  if (!(d_eff > 0.0)) throw std::invalid_argument("CollapseConfig: d_eff > 0");
  if (generations == 0 || generations > 200)
    throw std::invalid_argument("CollapseConfig: T in [1, 200]");
  if (n_per_gen <= dim)
    throw std::invalid_argument(
        "CollapseConfig: n_per_gen must exceed dim (singular fit otherwise)");
  if (mode == CollapseMode::kAccumulation && !(rho.value() > 0.0))
    throw std::invalid_argument("CollapseConfig: accumulation requires rho > 0");
  if (n0 == 0) throw std::invalid_argument("CollapseConfig: n0 >= 1");
}

Probability collapse_lower_bound(std::uint64_t generations, double d_eff,
                                 std::uint64_t n_min) {
  if (!(d_eff > 0.0))
    throw std::invalid_argument("collapse_lower_bound: d_eff > 0");
  if (n_min == 0) throw std::invalid_argument("collapse_lower_bound: n_min >= 1");
  const auto t = static_cast<double>(generations);
  return Probability(
      -std::expm1(-t * t * d_eff / (128.0 * kPi * static_cast<double>(n_min))));
}

double accumulation_ceiling(double d_eff, Probability rho, std::uint64_t n0,
                            double c3) {
  if (!(rho.value() > 0.0))
    throw std::invalid_argument("accumulation_ceiling: rho > 0");
  if (!(d_eff > 0.0))
    throw std::invalid_argument("accumulation_ceiling: d_eff > 0");
  if (n0 == 0) throw std::invalid_argument("accumulation_ceiling: n0 >= 1");
  if (c3 < 0.0) throw std::invalid_argument("accumulation_ceiling: c3 >= 0");
  return c3 * d_eff * kPi * kPi /
         (6.0 * rho.value() * static_cast<double>(n0));
}

Probability ar_collapse_bound(std::uint64_t generations, double avg_entropy,
                              std::uint64_t seq_len, std::uint64_t n_min,
                              std::uint64_t vocab, double c2) {
  if (!(avg_entropy > 0.0))
    throw std::invalid_argument("ar_collapse_bound: avg entropy > 0");
  if (seq_len == 0 || n_min == 0 || vocab < 2)
    throw std::invalid_argument("ar_collapse_bound: bad sizes");
  if (!(c2 > 0.0)) throw std::invalid_argument("ar_collapse_bound: c2 > 0");
  const auto t = static_cast<double>(generations);
  const double exponent = c2 * t * t * avg_entropy *
                          static_cast<double>(seq_len) /
                          (static_cast<double>(n_min) *
                           std::log(static_cast<double>(vocab)));
  return Probability(-std::expm1(-exponent));
}

std::vector<CollapsePoint> simulate_collapse(const CollapseConfig& cfg,
                                             Seed seed) {
  cfg.validate();
  const auto dim = static_cast<Eigen::Index>(cfg.dim);
  Rng rng(seed);

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(dim, dim);

  std::vector<CollapsePoint> trajectory;
  trajectory.push_back({0, 0.0});  // KL(p0 || p0) = 0

  Eigen::MatrixXd samples(cfg.n_per_gen, dim);
  for (std::uint32_t t = 1; t <= cfg.generations; ++t) {
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("simulate_collapse: fitted covariance singular");
    const Eigen::MatrixXd chol = llt.matrixL();

    for (std::uint32_t row = 0; row < cfg.n_per_gen; ++row) {
      const bool real = cfg.mode == CollapseMode::kAccumulation &&
                        rng.bernoulli(cfg.rho.value());
      Eigen::VectorXd z(dim);
      for (Eigen::Index i = 0; i < dim; ++i) z(i) = rng.normal();
      if (real)
        samples.row(row) = z.transpose();  // population draw, N(0, I)
      else
        samples.row(row) = (mean + chol * z).transpose();
    }

    mean = samples.colwise().mean();
    const Eigen::MatrixXd centered = samples.rowwise() - mean.transpose();
    cov = centered.transpose() * centered /
              static_cast<double>(cfg.n_per_gen - 1) +
          1e-9 * Eigen::MatrixXd::Identity(dim, dim);

    // KL(N(mean, cov) || N(0, I)) in closed form.
    const double trace = cov.trace();
    const double logdet = std::log(
        cov.llt().matrixL().toDenseMatrix().diagonal().array().square().prod());
    const double kl = 0.5 * (trace + mean.squaredNorm() -
                             static_cast<double>(dim) - logdet);
    trajectory.push_back({t, kl});
  }
  return trajectory;
}

void EditConfig::validate() const {
  if (d == 0) throw std::invalid_argument("EditConfig: d >= 1");
  if (!(alpha > 1.0))
    throw std::invalid_argument("EditConfig: superposition ratio alpha > 1");
  if (!(c > 0.0 && eta_mag > 0.0 && tau > 0.0))
    throw std::invalid_argument("EditConfig: c, eta, tau > 0");
  if (rank == 0 || layers_edited == 0)
    throw std::invalid_argument("EditConfig: rank, layers >= 1");
}

double edit_interference(const EditConfig& cfg, double value_shift_norm) {
  cfg.validate();
  if (!(value_shift_norm > 0.0))
    throw std::invalid_argument("edit_interference: ||v'-v|| > 0");
  return cfg.c / std::sqrt(static_cast<double>(cfg.d)) * value_shift_norm *
         (1.0 - 1.0 / cfg.alpha);
}

EditCapacity edit_capacity(const EditConfig& cfg) {
  cfg.validate();
  EditCapacity out;
  out.k_star = cfg.tau * std::sqrt(static_cast<double>(cfg.d)) /
               (cfg.c * cfg.eta_mag * (1.0 - 1.0 / cfg.alpha));
  out.k_star_rank_r = static_cast<double>(cfg.rank) * out.k_star;
  out.k_star_multilayer = static_cast<double>(cfg.layers_edited) * out.k_star;
  return out;
}

EvoprefGap evopref_gap(Probability gamma, std::uint64_t n, std::uint64_t mu,
                       std::uint64_t generations, Probability delta,
                       const EvoprefConstants& constants) {
  if (n == 0 || mu == 0 || generations == 0)
    throw std::invalid_argument("evopref_gap: n, mu, G >= 1");
  if (!(delta.value() > 0.0 && delta.value() < 1.0))
    throw std::invalid_argument("evopref_gap: delta in (0,1)");
  if (!(constants.lambda_conv > 0.0))
    throw std::invalid_argument("evopref_gap: lambda > 0");
  EvoprefGap out;
  out.sample_term =
      constants.c1 * std::sqrt(gamma.value() * std::log(1.0 / delta.value()) /
                               static_cast<double>(n));
  out.population_term = constants.c2 / std::sqrt(static_cast<double>(mu));
  out.convergence_term =
      constants.c3 *
      std::exp(-constants.lambda_conv * static_cast<double>(generations));
  out.total = out.sample_term + out.population_term + out.convergence_term;
  return out;
}

}  // namespace speclab::adaptation
