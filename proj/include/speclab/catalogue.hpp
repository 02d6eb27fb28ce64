#pragma once

// The sixteen-entry limit catalogue: one row per impossibility specification
// with its computable boundary condition, quantified violation cost and
// prescribed design rule, plus live evaluation of the boundary where the
// caller supplies parameters.

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "speclab/core.hpp"

namespace speclab::catalogue {

struct Row {
  int id = 0;
  const char* name = "";
  const char* boundary = "";
  const char* violation_cost = "";
  const char* design_rule = "";
  CostUnits cost_units = CostUnits::kProbability;
  Rule rule = Rule::kDelegateToTools;
};

const std::array<Row, 16>& rows();

// Parameters a caller may supply to inline a live boundary value.
struct LiveParams {
  std::optional<std::uint32_t> layers;     // L
  std::optional<std::uint32_t> width;      // d
  std::optional<double> depth;             // reasoning depth / chain length
  std::optional<double> eps;               // per-step error
  std::optional<std::uint64_t> documents;  // N
  std::optional<std::uint64_t> rank;       // r
  std::optional<double> gamma;             // misspecification
  std::optional<double> gap;               // Delta
  std::optional<double> p_a;               // vote fraction
  std::optional<double> retention_p;       // subgraph retention
  std::optional<std::uint32_t> k_stages;   // pipeline stages
};

// Computes the row's boundary value from the supplied parameters; empty when
// the row has no numeric boundary or parameters are missing.
std::optional<double> live_boundary(int spec_id, const LiveParams& params);

// Uniform verdict for a spec given its boundary value and violation state.
SpecVerdict make_verdict(int spec_id, double boundary_value, bool satisfied,
                         double violation_cost);

}  // namespace speclab::catalogue
