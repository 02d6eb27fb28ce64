#pragma once

// Computation-grounding composition calculators: retention factor, joint
// reliability, marginal-benefit attenuation, and the crossover-depth solver.

#include <optional>

#include "speclab/core.hpp"

namespace speclab::compose {

struct CompositionParams {
  double depth = 1.0;            // n, reasoning hops (real-valued)
  Probability eps{0.03};         // per-step error, < 0.5
  Probability retrieval_q{0.8};  // retrieval quality, (0,1]
  Probability retention{0.7};    // eta

  void validate() const;
};

// eta = min(1, C_hop / H(R_t | R_{t-1})).
Probability retention_factor(double c_hop_bits, double h_cond_bits);

// g = (1-eps)^n q^{n(1-eta)}.
Probability joint_reliability(const CompositionParams& p);

// dg/dq = n (1-eta) (1-eps)^n q^{n(1-eta)-1}.
double reliability_marginal_q(const CompositionParams& p);

struct Attenuation {
  double marginal_at_n = 0.0;
  double marginal_at_shallow = 0.0;
  double attenuation = 0.0;  // shallow / deep
};

Attenuation marginal_attenuation(const CompositionParams& p, double n_shallow);

struct CrossoverCosts {
  double cost_eps = 1.0;  // budget per relative reduction of eps
  double cost_q = 1.0;    // budget per relative reduction of 1-q, per hop
  // Diminishing-returns exponents on the improvement rates; 1 reproduces
  // multiplicative improvement (halving eps or 1-q costs a constant).
  double exponent_eps = 1.0;
  double exponent_q = 1.0;
};

// Depth at which the marginal log-reliability per unit budget of improving
// eps equals that of improving q. Investment in eps is model-level while
// retrieval investment is paid once per hop; under multiplicative
// improvement the residual is
//   n eps^a_eps / ((1-eps) c_eps) - (1-eta)(1-q)^a_q / (q c_q)
// and the root is found on [1, 100]. Empty when no root exists there
// (e.g. eta = 1 makes grounding irrelevant).
std::optional<double> crossover_depth(Probability eps, Probability retention,
                                      Probability retrieval_q,
                                      const CrossoverCosts& costs = {});

}  // namespace speclab::compose
