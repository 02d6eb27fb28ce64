#pragma once

// Entropy-threshold stopping on finite absorbing Markov chains, with an
// exact dynamic-programming oracle for the Bayes-optimal stopping loss.
//
// Semantics. A trajectory runs on a known kernel. At any step the posterior
// over final answers, given the state reached so far, is the absorption
// distribution from that state; its Shannon entropy is the quantity the
// stopping rule thresholds. Stopping at time tau emits the posterior argmax.
// The loss of a trial is 1[emitted answer != the answer this trajectory
// eventually absorbs at] + lambda * tau, so stopping early is a prediction
// of the chain's own final answer. The separately reported accuracy compares
// the emitted answer against the model's designated correct label.

#include <cstdint>
#include <string>
#include <vector>

#include "speclab/core.hpp"

namespace speclab::chain {

struct ChainModel {
  std::uint32_t n_states = 0;
  // Row-stochastic, row-major n_states x n_states. Absorbing rows identity.
  std::vector<double> kernel;
  std::vector<std::uint32_t> correct_states;
  std::vector<std::uint32_t> error_states;
  std::vector<std::uint32_t> absorbing_states;
  std::uint32_t start_state = 0;
  // readout[i] = answer label of absorbing_states[i].
  std::vector<std::uint32_t> readout;
  std::uint32_t answer_space = 2;
  std::uint32_t correct_answer = 0;

  double at(std::uint32_t row, std::uint32_t col) const {
    return kernel[static_cast<std::size_t>(row) * n_states + col];
  }
  bool is_absorbing(std::uint32_t state) const;
  // Throws unless rows sum to 1 (1e-12), absorbing rows are identity, the
  // correct/error sets partition the transient states and the start state is
  // correct or already absorbed.
  void validate() const;
};

struct StoppingConfig {
  Probability lambda{0.025};     // per-step cost
  Probability gamma_hat{0.3};    // spectral-gap estimate feeding h*
  Probability ema_coeff{0.3};    // smoothing weight on the newest entropy
  std::uint32_t n_max = 100;     // fallback horizon
};

struct StoppingResult {
  double mean_loss = 0.0;
  double mean_tau = 0.0;
  SimReport accuracy;  // emitted answer == designated correct label
};

struct TrajectoryRow {
  std::uint64_t trial = 0;
  std::uint32_t step = 0;
  std::uint32_t state = 0;
  double entropy = 0.0;
  double smoothed_entropy = 0.0;
  bool stopped = false;
};

// Absorption distribution over answer labels from every state; rows sum to 1.
// Throws if some transient state cannot reach an absorbing answer state.
std::vector<double> absorption_posteriors(const ChainModel& model);

StoppingResult run_stopping(const ChainModel& model,
                            const StoppingConfig& config, std::uint64_t trials,
                            Seed seed, unsigned threads = 1,
                            std::vector<TrajectoryRow>* trajectory_dump = nullptr);

// Exact Bayes-optimal expected loss over the finite horizon: backward
// induction with stop cost 1 - max_a posterior_a(state) and continue cost
// lambda. Lower-bounds every stopping rule on the same model.
double stopping_oracle(const ChainModel& model, Probability lambda,
                       std::uint32_t horizon);

// Exact expected loss of the fixed rule "always stop at step t".
double fixed_horizon_loss(const ChainModel& model, Probability lambda,
                          std::uint32_t stop_at, std::uint32_t horizon);

// Least-squares fit of H_t ~ H0 (1-gamma)^t + floor over pooled
// trajectories; returns gamma clipped to (0, 1]. Rejects constant input.
Probability estimate_spectral_gap(
    const std::vector<std::vector<double>>& entropy_trajectories);

// Planted-spectral-gap family used by tests and scenarios: `transient`
// undecided states that each resolve with probability gamma per step
// (leaning toward the correct answer with weight `lean`), else reshuffle
// uniformly. Two absorbing answer states.
ChainModel make_planted_gap_chain(std::uint32_t transient, Probability gamma,
                                  double lean = 0.65);

// Mixing-time proxy ln(n_states)/gamma used when reporting oracle slack.
double mixing_time_proxy(const ChainModel& model, Probability gamma);

}  // namespace speclab::chain
