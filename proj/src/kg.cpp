#include "speclab/kg.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "speclab/parallel.hpp"
#include "speclab/rng.hpp"

namespace speclab::grounding {
namespace {

// Query-scoring machinery over a fixed triple list. Scores are kept as
// doubled integers (2*direct + support) so ranking never touches floats.
struct QueryIndex {
  std::vector<std::string> candidates;          // entities, sorted
  std::vector<std::uint32_t> direct_mask;       // per candidate
  // Support paths per candidate: (first-leg triple, second-leg triple).
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> paths;

  std::size_t triple_count = 0;

  // Highest-scoring candidates under a retention mask; doubled scores.
  void scores(std::uint32_t mask, std::vector<long>& out) const {
    out.assign(candidates.size(), 0);
    for (std::size_t e = 0; e < candidates.size(); ++e) {
      long s = 2L * std::popcount(mask & direct_mask[e]);
      for (const auto& [leg1, leg2] : paths[e]) {
        if ((mask >> leg1 & 1u) && (mask >> leg2 & 1u)) s += 1;
      }
      out[e] = s;
    }
  }
};

QueryIndex build_index(const std::vector<Triple>& triples,
                       const Query& query) {
  if (triples.size() > 31)
    throw std::invalid_argument("kg: too many triples for mask enumeration");
  QueryIndex index;
  index.triple_count = triples.size();

  std::set<std::string> tails;
  for (const auto& t : triples)
    if (t.head == query.head && t.relation == query.relation)
      tails.insert(t.tail);
  // Two-hop endpoints are candidates too.
  for (std::size_t i = 0; i < triples.size(); ++i) {
    if (triples[i].head != query.head) continue;
    const std::string& mid = triples[i].tail;
    if (mid == query.head) continue;
    for (std::size_t j = 0; j < triples.size(); ++j) {
      if (j == i || triples[j].head != mid) continue;
      if (triples[j].tail == query.head || triples[j].tail == mid) continue;
      tails.insert(triples[j].tail);
    }
  }
  index.candidates.assign(tails.begin(), tails.end());
  index.direct_mask.assign(index.candidates.size(), 0);
  index.paths.resize(index.candidates.size());

  auto candidate_slot = [&](const std::string& name) -> long {
    const auto it = std::lower_bound(index.candidates.begin(),
                                     index.candidates.end(), name);
    if (it == index.candidates.end() || *it != name) return -1;
    return it - index.candidates.begin();
  };

  for (std::size_t i = 0; i < triples.size(); ++i) {
    if (triples[i].head == query.head &&
        triples[i].relation == query.relation) {
      const long slot = candidate_slot(triples[i].tail);
      if (slot >= 0)
        index.direct_mask[static_cast<std::size_t>(slot)] |= 1u << i;
    }
  }
  for (std::size_t i = 0; i < triples.size(); ++i) {
    if (triples[i].head != query.head) continue;
    const std::string& mid = triples[i].tail;
    if (mid == query.head) continue;
    for (std::size_t j = 0; j < triples.size(); ++j) {
      if (j == i || triples[j].head != mid) continue;
      if (triples[j].tail == query.head || triples[j].tail == mid) continue;
      const long slot = candidate_slot(triples[j].tail);
      if (slot >= 0)
        index.paths[static_cast<std::size_t>(slot)].emplace_back(
            static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
    }
  }
  return index;
}

// Entities within the top `rank_cutoff` distinct positions, score > 0.
void top_ranked(const QueryIndex& index, const std::vector<long>& scores,
                std::uint32_t rank_cutoff, std::vector<std::size_t>& out) {
  out.clear();
  std::vector<std::size_t> order;
  for (std::size_t e = 0; e < scores.size(); ++e)
    if (scores[e] > 0) order.push_back(e);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return index.candidates[a] < index.candidates[b];
  });
  for (std::size_t r = 0; r < order.size() && r < rank_cutoff; ++r)
    out.push_back(order[r]);
}

std::vector<double> expected_vote_shares(const QueryIndex& index,
                                         Probability retention) {
  const std::size_t m = index.triple_count;
  const double p = retention.value();
  std::vector<double> keep_pow(m + 1), drop_pow(m + 1);
  keep_pow[0] = drop_pow[0] = 1.0;
  for (std::size_t i = 1; i <= m; ++i) {
    keep_pow[i] = keep_pow[i - 1] * p;
    drop_pow[i] = drop_pow[i - 1] * (1.0 - p);
  }
  std::vector<double> share(index.candidates.size(), 0.0);
  std::vector<long> scores;
  std::vector<std::size_t> top;
  const std::uint32_t total = 1u << m;
  for (std::uint32_t mask = 0; mask < total; ++mask) {
    const auto kept = static_cast<std::size_t>(std::popcount(mask));
    const double weight = keep_pow[kept] * drop_pow[m - kept];
    index.scores(mask, scores);
    top_ranked(index, scores, 1, top);  // expected share uses top-1 votes
    for (std::size_t e : top) share[e] += weight;
  }
  return share;
}

// Majority (top-1 expected-vote) prediction; empty when no candidate ever
// scores. rank_cutoff affects per-subgraph voting in kg_vote; the exact
// oracle compares top-1 majority winners.
std::string exact_majority(const std::vector<Triple>& triples,
                           const Query& query, Probability retention,
                           std::uint32_t rank_cutoff) {
  const QueryIndex index = build_index(triples, query);
  if (index.candidates.empty()) return {};
  const std::size_t m = index.triple_count;
  const double p = retention.value();
  std::vector<double> keep_pow(m + 1), drop_pow(m + 1);
  keep_pow[0] = drop_pow[0] = 1.0;
  for (std::size_t i = 1; i <= m; ++i) {
    keep_pow[i] = keep_pow[i - 1] * p;
    drop_pow[i] = drop_pow[i - 1] * (1.0 - p);
  }
  std::vector<double> share(index.candidates.size(), 0.0);
  std::vector<long> scores;
  std::vector<std::size_t> top;
  const std::uint32_t total = 1u << m;
  for (std::uint32_t mask = 0; mask < total; ++mask) {
    const auto kept = static_cast<std::size_t>(std::popcount(mask));
    const double weight = keep_pow[kept] * drop_pow[m - kept];
    index.scores(mask, scores);
    top_ranked(index, scores, rank_cutoff, top);
    for (std::size_t e : top) share[e] += weight;
  }
  std::size_t best = 0;
  for (std::size_t e = 1; e < share.size(); ++e) {
    if (share[e] > share[best] ||
        (share[e] == share[best] &&
         index.candidates[e] < index.candidates[best]))
      best = e;
  }
  if (share[best] <= 0.0) return {};
  return index.candidates[best];
}

}  // namespace

void ToyKG::validate() const {
  std::set<std::string> declared(entities.begin(), entities.end());
  std::set<std::pair<std::string, std::pair<std::string, std::string>>> seen;
  for (const auto& t : triples) {
    if (!declared.count(t.head) || !declared.count(t.tail))
      throw std::invalid_argument("ToyKG: triple references undeclared entity");
    if (!seen.insert({t.head, {t.relation, t.tail}}).second)
      throw std::invalid_argument("ToyKG: duplicate triple");
  }
}

bool ToyKG::has_entity(const std::string& name) const {
  return std::find(entities.begin(), entities.end(), name) != entities.end();
}

ToyKG load_kg(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_kg: cannot open " + path);
  ToyKG kg;
  std::set<std::string> entities, relations;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    Triple t;
    if (!std::getline(row, t.head, '\t') ||
        !std::getline(row, t.relation, '\t') || !std::getline(row, t.tail))
      throw std::runtime_error("load_kg: malformed line: " + line);
    entities.insert(t.head);
    entities.insert(t.tail);
    relations.insert(t.relation);
    kg.triples.push_back(std::move(t));
  }
  kg.entities.assign(entities.begin(), entities.end());
  kg.relations.assign(relations.begin(), relations.end());
  kg.validate();
  return kg;
}

VoteOutcome kg_vote(const ToyKG& kg, const Query& query, std::uint32_t l,
                    Probability retention, std::uint32_t rank_cutoff,
                    Seed seed, unsigned threads) {
  kg.validate();
  if (kg.triples.empty()) throw std::invalid_argument("kg_vote: empty KG");
  if (l == 0) throw std::invalid_argument("kg_vote: L >= 1");
  if (rank_cutoff == 0) throw std::invalid_argument("kg_vote: rank cutoff >= 1");
  if (!(retention.value() > 0.0 && retention.value() <= 1.0))
    throw std::invalid_argument("kg_vote: retention in (0,1]");

  const QueryIndex index = build_index(kg.triples, query);
  if (index.candidates.empty())
    throw std::runtime_error("kg_vote: query has no candidates in the graph");

  const std::size_t m = kg.triples.size();
  std::vector<std::atomic<std::uint64_t>> votes(index.candidates.size());
  for (auto& v : votes) v.store(0);

  parallel_for(l, threads, [&](std::size_t draw) {
    Rng rng(derive_trial_seed(seed, draw));
    std::uint32_t mask = 0;
    for (std::size_t i = 0; i < m; ++i)
      if (rng.bernoulli(retention.value())) mask |= 1u << i;
    std::vector<long> scores;
    std::vector<std::size_t> top;
    index.scores(mask, scores);
    top_ranked(index, scores, rank_cutoff, top);
    for (std::size_t e : top)
      votes[e].fetch_add(1, std::memory_order_relaxed);
  });

  std::size_t best = 0;
  for (std::size_t e = 1; e < votes.size(); ++e) {
    const std::uint64_t v = votes[e].load(), b = votes[best].load();
    if (v > b || (v == b && index.candidates[e] < index.candidates[best]))
      best = e;
  }
  VoteOutcome out;
  out.prediction = index.candidates[best];
  out.report = make_proportion_report(votes[best].load(), l, seed);
  out.p_a = Probability(out.report.estimate);
  return out;
}

std::vector<std::pair<std::string, double>> exact_vote_shares(
    const ToyKG& kg, const Query& query, Probability retention,
    std::uint32_t rank_cutoff) {
  kg.validate();
  if (kg.triples.size() > 20)
    throw std::invalid_argument("exact_vote_shares: <= 20 triples");
  const QueryIndex index = build_index(kg.triples, query);
  const std::size_t m = kg.triples.size();
  const double p = retention.value();
  std::vector<double> keep_pow(m + 1), drop_pow(m + 1);
  keep_pow[0] = drop_pow[0] = 1.0;
  for (std::size_t i = 1; i <= m; ++i) {
    keep_pow[i] = keep_pow[i - 1] * p;
    drop_pow[i] = drop_pow[i - 1] * (1.0 - p);
  }
  std::vector<double> share(index.candidates.size(), 0.0);
  std::vector<long> scores;
  std::vector<std::size_t> top;
  const std::uint32_t total = 1u << m;
  for (std::uint32_t mask = 0; mask < total; ++mask) {
    const auto kept = static_cast<std::size_t>(std::popcount(mask));
    const double weight = keep_pow[kept] * drop_pow[m - kept];
    index.scores(mask, scores);
    top_ranked(index, scores, rank_cutoff, top);
    for (std::size_t e : top) share[e] += weight;
  }
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t e = 0; e < share.size(); ++e)
    out.emplace_back(index.candidates[e], share[e]);
  return out;
}

bool radius_oracle(const ToyKG& kg, const Query& query, Probability retention,
                   std::uint32_t delta_test, std::uint32_t rank_cutoff) {
  kg.validate();
  if (kg.triples.size() + delta_test > 14)
    throw std::invalid_argument(
        "radius_oracle: |triples| + delta_test must stay <= 14");
  if (delta_test == 0) return true;

  const std::string base =
      exact_majority(kg.triples, query, retention, rank_cutoff);
  if (base.empty())
    throw std::runtime_error("radius_oracle: base query has no prediction");

  // Candidate edits: remove any existing triple, or add any declared triple
  // not already present.
  struct Edit {
    bool removal = false;
    std::size_t remove_index = 0;
    Triple addition;
  };
  std::vector<Edit> edits;
  for (std::size_t i = 0; i < kg.triples.size(); ++i)
    edits.push_back({true, i, {}});
  std::set<std::pair<std::string, std::pair<std::string, std::string>>> present;
  for (const auto& t : kg.triples)
    present.insert({t.head, {t.relation, t.tail}});
  for (const auto& head : kg.entities)
    for (const auto& rel : kg.relations)
      for (const auto& tail : kg.entities) {
        if (head == tail) continue;
        if (present.count({head, {rel, tail}})) continue;
        edits.push_back({false, 0, Triple{head, rel, tail}});
      }

  // Enumerate edit subsets of size 1..delta_test (sizes beyond 2 are gated
  // by the feasibility cap anyway).
  std::vector<std::size_t> chosen;
  auto apply_and_check = [&](const std::vector<std::size_t>& pick) {
    std::vector<Triple> perturbed;
    std::vector<bool> removed(kg.triples.size(), false);
    for (std::size_t idx : pick)
      if (edits[idx].removal) removed[edits[idx].remove_index] = true;
    for (std::size_t i = 0; i < kg.triples.size(); ++i)
      if (!removed[i]) perturbed.push_back(kg.triples[i]);
    for (std::size_t idx : pick)
      if (!edits[idx].removal) perturbed.push_back(edits[idx].addition);
    const std::string pred =
        exact_majority(perturbed, query, retention, rank_cutoff);
    return pred == base;  // an empty prediction counts as a flip
  };

  std::function<bool(std::size_t, std::uint32_t)> search =
      [&](std::size_t start, std::uint32_t budget) -> bool {
    if (!chosen.empty() && !apply_and_check(chosen)) return false;
    if (budget == 0) return true;
    for (std::size_t i = start; i < edits.size(); ++i) {
      chosen.push_back(i);
      const bool survives = search(i + 1, budget - 1);
      chosen.pop_back();
      if (!survives) return false;
    }
    return true;
  };
  return search(0, delta_test);
}

}  // namespace speclab::grounding
