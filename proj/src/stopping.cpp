#include "speclab/stopping.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>

#include "speclab/chain.hpp"
#include "speclab/parallel.hpp"
#include "speclab/rng.hpp"

namespace speclab::chain {
namespace {

double shannon_entropy(const double* dist, std::uint32_t size) {
  double h = 0.0;
  for (std::uint32_t i = 0; i < size; ++i)
    if (dist[i] > 0.0) h -= dist[i] * std::log(dist[i]);
  return h;
}

std::uint32_t argmax_label(const double* dist, std::uint32_t size) {
  std::uint32_t best = 0;
  for (std::uint32_t i = 1; i < size; ++i)
    if (dist[i] > dist[best]) best = i;
  return best;
}

}  // namespace

bool ChainModel::is_absorbing(std::uint32_t state) const {
  return std::find(absorbing_states.begin(), absorbing_states.end(), state) !=
         absorbing_states.end();
}

void ChainModel::validate() const {
  if (n_states == 0 || kernel.size() != static_cast<std::size_t>(n_states) * n_states)
    throw std::invalid_argument("ChainModel: kernel size mismatch");
  if (answer_space == 0 || correct_answer >= answer_space)
    throw std::invalid_argument("ChainModel: bad answer space");
  if (readout.size() != absorbing_states.size())
    throw std::invalid_argument("ChainModel: readout/absorbing size mismatch");
  for (std::uint32_t r = 0; r < n_states; ++r) {
    double sum = 0.0;
    for (std::uint32_t c = 0; c < n_states; ++c) {
      const double v = at(r, c);
      if (v < 0.0) throw std::invalid_argument("ChainModel: negative entry");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw std::invalid_argument("ChainModel: row " + std::to_string(r) +
                                  " does not sum to 1");
  }
  for (std::uint32_t a : absorbing_states) {
    for (std::uint32_t c = 0; c < n_states; ++c) {
      const double expected = c == a ? 1.0 : 0.0;
      if (std::abs(at(a, c) - expected) > 1e-12)
        throw std::invalid_argument("ChainModel: absorbing row not identity");
    }
  }
  for (std::uint32_t label : readout)
    if (label >= answer_space)
      throw std::invalid_argument("ChainModel: readout label out of range");
  // correct/error must partition the transient states.
  std::vector<bool> seen(n_states, false);
  for (std::uint32_t s : correct_states) {
    if (is_absorbing(s))
      throw std::invalid_argument("ChainModel: correct set contains absorbing");
    seen[s] = true;
  }
  for (std::uint32_t s : error_states) {
    if (is_absorbing(s))
      throw std::invalid_argument("ChainModel: error set contains absorbing");
    if (seen[s])
      throw std::invalid_argument("ChainModel: correct/error sets overlap");
    seen[s] = true;
  }
  for (std::uint32_t s = 0; s < n_states; ++s)
    if (!is_absorbing(s) && !seen[s])
      throw std::invalid_argument(
          "ChainModel: transient state in neither partition");
  const bool start_ok =
      is_absorbing(start_state) ||
      std::find(correct_states.begin(), correct_states.end(), start_state) !=
          correct_states.end();
  if (!start_ok)
    throw std::invalid_argument("ChainModel: start state must be correct");
}

std::vector<double> absorption_posteriors(const ChainModel& model) {
  model.validate();
  const std::uint32_t n = model.n_states;
  std::vector<std::uint32_t> transient;
  std::vector<int> transient_index(n, -1);
  for (std::uint32_t s = 0; s < n; ++s)
    if (!model.is_absorbing(s)) {
      transient_index[s] = static_cast<int>(transient.size());
      transient.push_back(s);
    }
  const auto t = static_cast<Eigen::Index>(transient.size());
  const auto labels = model.answer_space;

  std::vector<double> posteriors(
      static_cast<std::size_t>(n) * labels, 0.0);
  for (std::size_t i = 0; i < model.absorbing_states.size(); ++i) {
    const std::uint32_t s = model.absorbing_states[i];
    posteriors[static_cast<std::size_t>(s) * labels + model.readout[i]] = 1.0;
  }
  if (t == 0) return posteriors;

  Eigen::MatrixXd Q(t, t);
  Eigen::MatrixXd R(t, labels);
  R.setZero();
  for (Eigen::Index i = 0; i < t; ++i) {
    const std::uint32_t row = transient[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < t; ++j)
      Q(i, j) = model.at(row, transient[static_cast<std::size_t>(j)]);
    for (std::size_t a = 0; a < model.absorbing_states.size(); ++a)
      R(i, model.readout[a]) += model.at(row, model.absorbing_states[a]);
  }
  const Eigen::MatrixXd M = Eigen::MatrixXd::Identity(t, t) - Q;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
  if (!lu.isInvertible())
    throw std::invalid_argument(
        "ChainModel: no absorbing answer state reachable from some "
        "transient state");
  const Eigen::MatrixXd A = lu.solve(R);  // t x labels absorption matrix
  for (Eigen::Index i = 0; i < t; ++i) {
    const std::uint32_t s = transient[static_cast<std::size_t>(i)];
    double row_sum = 0.0;
    for (std::uint32_t a = 0; a < labels; ++a) row_sum += A(i, a);
    if (std::abs(row_sum - 1.0) > 1e-9)
      throw std::invalid_argument(
          "ChainModel: absorption mass below 1; chain does not terminate");
    for (std::uint32_t a = 0; a < labels; ++a)
      posteriors[static_cast<std::size_t>(s) * labels + a] = A(i, a);
  }
  return posteriors;
}

StoppingResult run_stopping(const ChainModel& model,
                            const StoppingConfig& config, std::uint64_t trials,
                            Seed seed, unsigned threads,
                            std::vector<TrajectoryRow>* trajectory_dump) {
  if (trials == 0) throw std::invalid_argument("run_stopping: trials >= 1");
  if (!(config.lambda.value() > 0.0 && config.lambda.value() < 1.0))
    throw std::invalid_argument("run_stopping: lambda in (0,1)");
  if (!(config.gamma_hat.value() > 0.0))
    throw std::invalid_argument("run_stopping: gamma_hat in (0,1]");
  const std::vector<double> posterior = absorption_posteriors(model);
  const std::uint32_t labels = model.answer_space;
  const double h_star =
      entropy_threshold(config.lambda, config.gamma_hat);
  const double ema_new = config.ema_coeff.value();

  // Absorb-to-completion cap; trajectories that are still transient here are
  // scored at their current posterior argmax.
  const std::uint32_t completion_cap = config.n_max * 50 + 1000;

  struct TrialOut {
    double loss = 0.0;
    std::uint32_t tau = 0;
    bool correct_vs_designated = false;
  };
  std::vector<TrialOut> out(trials);
  std::vector<std::vector<TrajectoryRow>> dumps;
  if (trajectory_dump) dumps.resize(trials);

  parallel_for(trials, threads, [&](std::size_t trial) {
    Rng rng(derive_trial_seed(seed, trial));
    std::uint32_t state = model.start_state;
    const double* dist = &posterior[static_cast<std::size_t>(state) * labels];
    double smoothed = std::log(static_cast<double>(labels));
    std::uint32_t step = 0;
    bool stopped = false;
    std::uint32_t tau = 0;
    std::uint32_t emitted = argmax_label(dist, labels);

    auto record = [&](double entropy) {
      if (!trajectory_dump) return;
      dumps[trial].push_back({trial, step, state, entropy, smoothed, stopped});
    };

    // Step 0 check: an already-absorbed start has zero entropy.
    {
      const double h = shannon_entropy(dist, labels);
      smoothed = model.is_absorbing(state)
                     ? ema_new * h + (1.0 - ema_new) * smoothed
                     : smoothed;  // EMA starts from ln|Y| before any step
      if (model.is_absorbing(state) || h <= 0.0) {
        if (h <= h_star) {
          stopped = true;
          emitted = argmax_label(dist, labels);
        }
      }
      record(h);
    }

    while (!stopped && step < config.n_max) {
      // Generate the next reasoning step.
      const double u = rng.uniform();
      double acc = 0.0;
      std::uint32_t next = model.n_states - 1;
      for (std::uint32_t c = 0; c < model.n_states; ++c) {
        acc += model.at(state, c);
        if (u < acc) {
          next = c;
          break;
        }
      }
      state = next;
      ++step;
      dist = &posterior[static_cast<std::size_t>(state) * labels];
      const double h = shannon_entropy(dist, labels);
      smoothed = ema_new * h + (1.0 - ema_new) * smoothed;
      if (smoothed <= h_star) {
        stopped = true;
        tau = step;
        emitted = argmax_label(dist, labels);
      }
      record(h);
    }
    if (!stopped) {
      tau = config.n_max;  // fallback
      emitted = argmax_label(dist, labels);
    }

    // Run the chain to absorption to realise this trajectory's own answer.
    std::uint32_t final_state = state;
    std::uint32_t extra = 0;
    while (!model.is_absorbing(final_state) && extra < completion_cap) {
      const double u = rng.uniform();
      double acc = 0.0;
      std::uint32_t next = model.n_states - 1;
      for (std::uint32_t c = 0; c < model.n_states; ++c) {
        acc += model.at(final_state, c);
        if (u < acc) {
          next = c;
          break;
        }
      }
      final_state = next;
      ++extra;
    }
    std::uint32_t final_answer = emitted;
    for (std::size_t a = 0; a < model.absorbing_states.size(); ++a)
      if (model.absorbing_states[a] == final_state)
        final_answer = model.readout[a];

    out[trial].loss = (emitted == final_answer ? 0.0 : 1.0) +
                      config.lambda.value() * static_cast<double>(tau);
    out[trial].tau = tau;
    out[trial].correct_vs_designated = emitted == model.correct_answer;
  });

  StoppingResult result;
  std::uint64_t hits = 0;
  for (const auto& o : out) {
    result.mean_loss += o.loss;
    result.mean_tau += static_cast<double>(o.tau);
    hits += o.correct_vs_designated ? 1 : 0;
  }
  result.mean_loss /= static_cast<double>(trials);
  result.mean_tau /= static_cast<double>(trials);
  result.accuracy = make_proportion_report(hits, trials, seed);
  if (trajectory_dump)
    for (auto& rows : dumps)
      trajectory_dump->insert(trajectory_dump->end(), rows.begin(), rows.end());
  return result;
}

double stopping_oracle(const ChainModel& model, Probability lambda,
                       std::uint32_t horizon) {
  if (model.n_states > 64)
    throw std::invalid_argument("stopping_oracle: model too large (<= 64)");
  if (horizon > 200)
    throw std::invalid_argument("stopping_oracle: horizon too large (<= 200)");
  const std::vector<double> posterior = absorption_posteriors(model);
  const std::uint32_t n = model.n_states;
  const std::uint32_t labels = model.answer_space;

  std::vector<double> stop_cost(n);
  for (std::uint32_t s = 0; s < n; ++s) {
    const double* dist = &posterior[static_cast<std::size_t>(s) * labels];
    stop_cost[s] = 1.0 - dist[argmax_label(dist, labels)];
  }

  // Backward induction on the Snell envelope.
  std::vector<double> value = stop_cost;  // forced stop at the horizon
  std::vector<double> next(n);
  for (std::uint32_t t = 0; t < horizon; ++t) {
    for (std::uint32_t s = 0; s < n; ++s) {
      double cont = lambda.value();
      for (std::uint32_t c = 0; c < n; ++c) {
        const double p = model.at(s, c);
        if (p > 0.0) cont += p * value[c];
      }
      next[s] = std::min(stop_cost[s], cont);
    }
    value.swap(next);
  }
  return value[model.start_state];
}

double fixed_horizon_loss(const ChainModel& model, Probability lambda,
                          std::uint32_t stop_at, std::uint32_t horizon) {
  if (stop_at > horizon)
    throw std::invalid_argument("fixed_horizon_loss: stop_at <= horizon");
  const std::vector<double> posterior = absorption_posteriors(model);
  const std::uint32_t n = model.n_states;
  const std::uint32_t labels = model.answer_space;

  std::vector<double> dist(n, 0.0);
  dist[model.start_state] = 1.0;
  std::vector<double> next(n);
  for (std::uint32_t t = 0; t < stop_at; ++t) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::uint32_t s = 0; s < n; ++s) {
      if (dist[s] == 0.0) continue;
      for (std::uint32_t c = 0; c < n; ++c) {
        const double p = model.at(s, c);
        if (p > 0.0) next[c] += dist[s] * p;
      }
    }
    dist.swap(next);
  }
  double expected_error = 0.0;
  for (std::uint32_t s = 0; s < n; ++s) {
    if (dist[s] == 0.0) continue;
    const double* post = &posterior[static_cast<std::size_t>(s) * labels];
    expected_error += dist[s] * (1.0 - post[argmax_label(post, labels)]);
  }
  return expected_error + lambda.value() * static_cast<double>(stop_at);
}

Probability estimate_spectral_gap(
    const std::vector<std::vector<double>>& entropy_trajectories) {
  if (entropy_trajectories.empty())
    throw std::invalid_argument("estimate_spectral_gap: need >= 1 trajectory");
  std::size_t min_len = SIZE_MAX;
  for (const auto& traj : entropy_trajectories) {
    if (traj.size() < 3)
      throw std::invalid_argument(
          "estimate_spectral_gap: trajectories need >= 3 points");
    min_len = std::min(min_len, traj.size());
  }
  std::vector<double> mean(min_len, 0.0);
  for (const auto& traj : entropy_trajectories)
    for (std::size_t t = 0; t < min_len; ++t) mean[t] += traj[t];
  for (auto& v : mean) v /= static_cast<double>(entropy_trajectories.size());

  double lo = *std::min_element(mean.begin(), mean.end());
  double hi = *std::max_element(mean.begin(), mean.end());
  if (hi - lo < 1e-12)
    throw std::invalid_argument(
        "estimate_spectral_gap: constant trajectory, gap unidentifiable");

  // Model H_t = A r^t + c. For fixed r, (A, c) is linear least squares;
  // scan r, then ternary-refine the smooth SSE(r).
  auto sse_for = [&](double r) {
    double s_gg = 0, s_g = 0, s_gy = 0, s_y = 0;
    const auto m = static_cast<double>(min_len);
    double rt = 1.0;
    for (std::size_t t = 0; t < min_len; ++t) {
      s_gg += rt * rt;
      s_g += rt;
      s_gy += rt * mean[t];
      s_y += mean[t];
      rt *= r;
    }
    const double det = s_gg * m - s_g * s_g;
    double A, c;
    if (std::abs(det) < 1e-14) {
      A = 0.0;
      c = s_y / m;
    } else {
      A = (s_gy * m - s_g * s_y) / det;
      c = (s_gg * s_y - s_g * s_gy) / det;
    }
    double sse = 0.0;
    rt = 1.0;
    for (std::size_t t = 0; t < min_len; ++t) {
      const double resid = mean[t] - (A * rt + c);
      sse += resid * resid;
      rt *= r;
    }
    return sse;
  };

  double best_r = 0.5, best_sse = sse_for(0.5);
  for (int i = 0; i <= 999; ++i) {
    const double r = static_cast<double>(i) / 1000.0;
    const double sse = sse_for(r);
    if (sse < best_sse) {
      best_sse = sse;
      best_r = r;
    }
  }
  double a = std::max(0.0, best_r - 0.002), b = std::min(0.999999, best_r + 0.002);
  for (int iter = 0; iter < 200; ++iter) {
    const double m1 = a + (b - a) / 3.0, m2 = b - (b - a) / 3.0;
    if (sse_for(m1) < sse_for(m2))
      b = m2;
    else
      a = m1;
  }
  const double gamma = 1.0 - 0.5 * (a + b);
  return Probability(std::clamp(gamma, 1e-12, 1.0));
}

ChainModel make_planted_gap_chain(std::uint32_t transient, Probability gamma,
                                  double lean) {
  if (transient < 2)
    throw std::invalid_argument("make_planted_gap_chain: transient >= 2");
  if (!(gamma.value() > 0.0 && gamma.value() <= 1.0))
    throw std::invalid_argument("make_planted_gap_chain: gamma in (0,1]");
  if (!(lean > 0.0 && lean < 1.0))
    throw std::invalid_argument("make_planted_gap_chain: lean in (0,1)");

  ChainModel model;
  model.n_states = transient + 2;
  model.answer_space = 2;
  model.correct_answer = 0;
  const std::uint32_t absorb_correct = transient;
  const std::uint32_t absorb_wrong = transient + 1;
  model.absorbing_states = {absorb_correct, absorb_wrong};
  model.readout = {0, 1};
  model.kernel.assign(
      static_cast<std::size_t>(model.n_states) * model.n_states, 0.0);

  const double g = gamma.value();
  for (std::uint32_t s = 0; s < transient; ++s) {
    // State-specific commitment: spread around the global lean so transient
    // posteriors differ across states.
    const double t = transient == 1
                         ? 0.5
                         : static_cast<double>(s) /
                               static_cast<double>(transient - 1);
    const double theta = std::clamp(lean + 0.6 * (t - 0.5), 0.05, 0.95);
    const double shuffle = (1.0 - g) / static_cast<double>(transient);
    for (std::uint32_t c = 0; c < transient; ++c)
      model.kernel[static_cast<std::size_t>(s) * model.n_states + c] = shuffle;
    model.kernel[static_cast<std::size_t>(s) * model.n_states + absorb_correct] =
        g * theta;
    model.kernel[static_cast<std::size_t>(s) * model.n_states + absorb_wrong] =
        g * (1.0 - theta);
    if (theta >= 0.5)
      model.correct_states.push_back(s);
    else
      model.error_states.push_back(s);
  }
  model.kernel[static_cast<std::size_t>(absorb_correct) * model.n_states +
               absorb_correct] = 1.0;
  model.kernel[static_cast<std::size_t>(absorb_wrong) * model.n_states +
               absorb_wrong] = 1.0;
  // Start in the most committed correct state.
  model.start_state = transient - 1;
  model.validate();
  return model;
}

double mixing_time_proxy(const ChainModel& model, Probability gamma) {
  return std::log(static_cast<double>(model.n_states)) / gamma.value();
}

}  // namespace speclab::chain
