#pragma once

// Toy knowledge graph with randomized-subgraph majority voting and a
// brute-force certification oracle.
//
// The scorer is deliberately transparent so the oracle can enumerate
// exactly: score(tail) = #retained direct triples (head, relation, tail)
// + 0.5 * #retained two-hop support paths head -> x -> tail (any relations,
// two distinct retained triples). Certification claims are scorer-agnostic.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "speclab/core.hpp"
#include "speclab/grounding.hpp"

namespace speclab::grounding {

struct Triple {
  std::string head;
  std::string relation;
  std::string tail;

  bool operator==(const Triple&) const = default;
};

struct ToyKG {
  std::vector<std::string> entities;
  std::vector<std::string> relations;
  std::vector<Triple> triples;

  void validate() const;  // entities declared, no duplicate triples
  bool has_entity(const std::string& name) const;
};

// Line-oriented triple file: head<TAB>relation<TAB>tail. Entities and
// relations are collected from the triples.
ToyKG load_kg(const std::string& path);

struct Query {
  std::string head;
  std::string relation;
};

struct VoteOutcome {
  std::string prediction;
  Probability p_a{0.0};  // winning candidate's vote fraction
  SimReport report;      // Wilson interval on p_a
};

// Majority vote over L random subgraphs (each triple kept with probability
// p); per-subgraph candidates are entities within the top `rank_cutoff`
// scores. Ties break lexicographically. Throws when the full graph offers
// no candidate for the query.
VoteOutcome kg_vote(const ToyKG& kg, const Query& query, std::uint32_t l,
                    Probability retention, std::uint32_t rank_cutoff,
                    Seed seed, unsigned threads = 1);

// Exact expected vote share per entity, by enumerating all 2^|triples|
// retention patterns. Usable for |triples| <= ~20.
std::vector<std::pair<std::string, double>> exact_vote_shares(
    const ToyKG& kg, const Query& query, Probability retention,
    std::uint32_t rank_cutoff);

// Exhaustive certification: true iff no perturbation of at most delta_test
// triple additions/removals flips the exact majority prediction. Additions
// range over declared entities x declared relations x declared entities.
// Feasibility cap: |triples| + delta_test <= ~14.
bool radius_oracle(const ToyKG& kg, const Query& query, Probability retention,
                   std::uint32_t delta_test, std::uint32_t rank_cutoff = 1);

}  // namespace speclab::grounding
