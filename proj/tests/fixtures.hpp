#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include "ddms/ddms.hpp"
#include "ddms/dms.hpp"
#include "ddms/extremum_pairing.hpp"
#include "ddms/saddle_pairing.hpp"

namespace fixtures {

using namespace ddms;

inline Age age_of(Index a) { return {a, -1, -1, -1}; }

// ---- extremum graphs -------------------------------------------------------

struct Instance {
  std::vector<Age> node_age;
  std::vector<int> node_owner;
  std::vector<GraphSaddle> saddles;
  std::vector<int> saddle_owner;
};

inline std::vector<LocalGraph> graphs_of(const Instance& in, int ranks) {
  const Index nn = static_cast<Index>(in.node_age.size());
  std::vector<LocalGraph> graphs(ranks);
  std::vector<std::set<int>> ghosts(nn);
  for (std::size_t i = 0; i < in.saddles.size(); ++i) {
    const int r = in.saddle_owner[i];
    graphs[r].saddles.push_back(in.saddles[i]);
    for (Index t : {in.saddles[i].t0, in.saddles[i].t1})
      if (in.node_owner[t] != r) ghosts[t].insert(r);
  }
  for (int r = 0; r < ranks; ++r)
    for (Index t = 0; t < nn; ++t) {
      if (in.node_owner[t] != r && !ghosts[t].count(r)) continue;
      GraphNode n{t, in.node_age[t], in.node_owner[t], {}};
      if (in.node_owner[t] == r) n.ghost_ranks.assign(ghosts[t].begin(), ghosts[t].end());
      graphs[r].nodes.push_back(n);
    }
  return graphs;
}

inline std::set<std::pair<Index, Index>> sequential_pairs(const Instance& in) {
  std::vector<GraphSaddle> sorted = in.saddles;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.age < b.age; });
  std::vector<Triplet> triplets;
  for (const GraphSaddle& s : sorted) triplets.push_back({s.id, s.t0, s.t1});
  const ExtremumPairing ref = pair_extrema_saddles(triplets, in.node_age);
  return {ref.pairs.begin(), ref.pairs.end()};
}

struct ExtremumRun {
  std::vector<DistributedPairs> per_rank;
  ExtremumPairingStats stats;  // of the watched rank
};

inline ExtremumRun run_extrema(const Instance& in, int ranks, std::uint64_t seed, int watch = 0) {
  const auto graphs = graphs_of(in, ranks);
  Transport t(ranks, {seed});
  ExtremumRun out;
  out.per_rank.resize(ranks);
  run_ranks(t, [&](int r) {
    ExtremumPairingStats st;
    out.per_rank[r] = self_correcting_pairing(r, graphs[r], t, {}, &st);
    if (r == watch) out.stats = st;
  });
  return out;
}

inline std::set<std::pair<Index, Index>> gathered(const ExtremumRun& run) {
  std::set<std::pair<Index, Index>> out;
  for (const auto& d : run.per_rank)
    for (const auto& p : d.pairs) out.insert({p.saddle, p.extremum});
  return out;
}

// Extrema t0..t4 by age, saddles 10..13 by age; rank 2 holds a stale copy of t3.
inline Instance stale_ghost_instance() {
  Instance in;
  for (Index a = 0; a < 5; ++a) in.node_age.push_back(age_of(a));
  in.node_owner = {0, 0, 1, 1, 2};
  in.saddles = {{10, age_of(0), 2, 1}, {11, age_of(1), 3, 2}, {12, age_of(2), 4, 0}, {13, age_of(3), 3, 4}};
  in.saddle_owner = {1, 1, 2, 2};
  return in;
}

// t0 lives on rank 0 but only ranks 1 and 2 see it; t1 lives on rank 2.
inline std::vector<std::vector<TracedSaddle>> ownership_traces() {
  auto end = [](Index id, int home) { return Endpoint{id, age_of(id), home, id}; };
  std::vector<std::vector<TracedSaddle>> traced(3);
  traced[1].push_back({50, {7, 3, -1, -1}, 7, {end(0, 0), end(1, 2)}});
  traced[2].push_back({51, {8, 4, -1, -1}, 8, {end(1, 2), end(0, 0)}});
  traced[2].push_back({52, {9, 4, -1, -1}, 9, {end(1, 2), end(1, 2)}});
  return traced;
}

inline std::vector<LocalGraph> ownership_graphs() {
  const auto traced = ownership_traces();
  Transport t(3);
  std::vector<LocalGraph> g(3);
  run_ranks(t, [&](int r) { g[r] = build_dist_graph(r, traced[r], Side::Min, t); });
  return g;
}

// ---- saddle-saddle propagation --------------------------------------------

// Table-driven complex shared by all ranks; each rank answers for what it owns.
struct ToyComplex : SaddleComplex {
  struct Edge {
    Index key = 0;
    int owner = 0;
    EdgeKind kind = EdgeKind::Critical;
    std::vector<Index> expansion;  // facets of the partner triangle
  };
  std::map<Index, Edge> edges;
  std::map<Index, std::vector<Index>> triangles;

  EdgeRef ref(Index id) const {
    const Edge& e = edges.at(id);
    return {id, {e.key, 0, -1, -1}, e.owner};
  }
  EdgeKind edge_kind(Index edge) const override { return edges.at(edge).kind; }
  void expansion(Index edge, std::vector<EdgeRef>& out) const override {
    for (Index f : edges.at(edge).expansion) out.push_back(ref(f));
  }
  void boundary(Index triangle, std::vector<EdgeRef>& out) const override {
    for (Index f : triangles.at(triangle)) out.push_back(ref(f));
  }
};

using Owned = std::map<int, std::vector<CriticalTriangle>>;

struct SaddleRun {
  std::vector<SaddlePairs> pairs;
  std::vector<SaddlePairingStats> stats;
  std::vector<TokenHop> hops;  // grouped by issuing rank
  Index tokens = 0;
};

inline SaddleRun run_saddles(const ToyComplex& complex, int ranks, const Owned& owned, SaddlePairingConfig config,
                             std::uint64_t seed = 0) {
  Transport t(ranks, {seed});
  SaddleRun out;
  out.pairs.resize(ranks);
  out.stats.resize(ranks);
  run_ranks(t, [&](int r) {
    const auto it = owned.find(r);
    const std::vector<CriticalTriangle> mine = it == owned.end() ? std::vector<CriticalTriangle>{} : it->second;
    out.pairs[r] = distributed_pair_critical_simplices(r, complex, mine, t, config, &out.stats[r]);
  });
  for (const auto& s : out.stats) {
    out.hops.insert(out.hops.end(), s.hops.begin(), s.hops.end());
    out.tokens += s.tokens_sent;
  }
  return out;
}

inline std::set<std::pair<Index, Index>> all_pairs(const SaddleRun& r) {
  std::set<std::pair<Index, Index>> out;
  for (const auto& p : r.pairs)
    for (const SaddlePair& sp : p.pairs) out.insert({sp.edge, sp.triangle.id});
  return out;
}

inline bool same_hop(const TokenHop& a, const TokenHop& b) {
  return a.triangle == b.triangle && a.src == b.src && a.dst == b.dst;
}

// sigma (100, rank 1) has boundary {1, 2} on rank 1 and 3 on rank 0; 3 is the highest.
inline ToyComplex handoff_complex() {
  using Kind = SaddleComplex::EdgeKind;
  ToyComplex c;
  c.edges[1] = {1, 1, Kind::Critical, {}};
  c.edges[2] = {2, 1, Kind::Critical, {}};
  c.edges[3] = {9, 0, Kind::Critical, {}};
  c.triangles[100] = {1, 2, 3};
  return c;
}
inline Owned handoff_owned() { return {{1, {{100, {10, 9, 2, -1}, 10}}}}; }

// sigma (100, rank 3) reaches edge 8 on rank 1; the path then alternates
// between ranks 1 and 2 before ending at edge 4 on rank 2.
inline ToyComplex chain_complex() {
  using Kind = SaddleComplex::EdgeKind;
  ToyComplex c;
  enum : Index { b = 1, a, d, cc, f2, e2, f1, e1, g };
  c.edges[b] = {1, 3, Kind::Critical, {}};
  c.edges[a] = {2, 3, Kind::Critical, {}};
  c.edges[g] = {0, 2, Kind::Critical, {}};
  c.edges[d] = {3, 1, Kind::Critical, {}};
  c.edges[cc] = {4, 2, Kind::Critical, {}};
  c.edges[f2] = {5, 2, Kind::Expandable, {f2, g}};
  c.edges[e2] = {6, 1, Kind::Expandable, {e2, f2, d}};
  c.edges[f1] = {7, 2, Kind::Expandable, {f1, f2, cc}};
  c.edges[e1] = {8, 1, Kind::Expandable, {e1, f1, e2}};
  c.triangles[100] = {e1, a, b};
  return c;
}
inline Owned chain_owned() { return {{3, {{100, {20, 8, 2, -1}, 20}}}}; }

// ---- pass/fail summaries ---------------------------------------------------

inline bool triplet_fixture() {
  const std::vector<Age> age = {age_of(5), age_of(2)};
  const std::vector<Triplet> triplets = {{0, 0, 1}};
  const ExtremumPairing p = pair_extrema_saddles(triplets, age);
  return p.pairs.size() == 1 && p.pairs[0] == std::pair<Index, Index>{0, 0} && p.representative[0] == 1;
}

inline bool ownership_fixture() {
  const std::vector<int> both = {1, 2};
  if (extremum_owner(0, both) != 1 || extremum_owner(2, both) != 2) return false;
  const auto g = ownership_graphs();
  if (!g[0].nodes.empty()) return false;
  for (int r : {1, 2}) {
    if (g[r].nodes.size() != 2) return false;
    for (const GraphNode& n : g[r].nodes)
      if (n.owner != (n.id == 0 ? 1 : 2)) return false;
  }
  return true;
}

inline bool stale_ghost_fixture() {
  const Instance in = stale_ghost_instance();
  const std::set<std::pair<Index, Index>> expect = {{10, 2}, {11, 3}, {12, 4}, {13, 1}};
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const ExtremumRun r = run_extrema(in, 3, seed, 2);
    const auto first = std::find_if(r.stats.claims.begin(), r.stats.claims.end(),
                                    [](const ClaimEvent& c) { return c.saddle == 13; });
    const auto last = std::find_if(r.stats.claims.rbegin(), r.stats.claims.rend(),
                                   [](const ClaimEvent& c) { return c.saddle == 13; });
    if (first == r.stats.claims.end() || first->extremum != 3 || last->extremum != 1) return false;
    if (gathered(r) != expect) return false;
  }
  return true;
}

inline bool single_handoff_fixture() {
  const SaddleRun r = run_saddles(handoff_complex(), 2, handoff_owned(), {});
  return r.tokens == 1 && r.hops.size() == 1 && same_hop(r.hops[0], {100, 1, 0}) && r.pairs[0].pairs.size() == 1 &&
         r.pairs[0].pairs[0].edge == 3;
}

inline bool anticipation_fixture() {
  SaddlePairingConfig with;
  with.anticipation = 1;
  const SaddleRun r1 = run_saddles(chain_complex(), 4, chain_owned(), with);
  const SaddleRun r0 = run_saddles(chain_complex(), 4, chain_owned(), {});
  return r1.hops.size() == 2 && r1.stats[3].hops.size() == 1 && same_hop(r1.stats[3].hops[0], {100, 3, 1}) &&
         r1.stats[1].hops.size() == 1 && same_hop(r1.stats[1].hops[0], {100, 1, 2}) &&
         r1.pairs[2].pairs.size() == 1 && r1.pairs[2].pairs[0].edge == 4 && r0.hops.size() == 4 &&
         all_pairs(r0) == all_pairs(r1);
}

}  // namespace fixtures
