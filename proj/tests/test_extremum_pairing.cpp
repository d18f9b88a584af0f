#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "ddms/ddms.hpp"
#include "ddms/extremum_pairing.hpp"
#include "ddms/field.hpp"
#include "ddms/order.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace ddms;
using namespace fixtures;

TEST_CASE("a stale ghost tag is corrected by the elder saddle") {
  const Instance in = stale_ghost_instance();
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const ExtremumRun r = run_extrema(in, 3, seed, 2);
    const auto first_s3 = std::find_if(r.stats.claims.begin(), r.stats.claims.end(),
                                       [](const ClaimEvent& c) { return c.saddle == 13; });
    REQUIRE(first_s3 != r.stats.claims.end());
    CHECK(first_s3->extremum == 3);
    const auto last_s3 = std::find_if(r.stats.claims.rbegin(), r.stats.claims.rend(),
                                      [](const ClaimEvent& c) { return c.saddle == 13; });
    CHECK(last_s3->extremum == 1);
    const std::set<std::pair<Index, Index>> expect = {{10, 2}, {11, 3}, {12, 4}, {13, 1}};
    CHECK(gathered(r) == expect);
    CHECK(gathered(r) == sequential_pairs(in));
    // t1 is owned by rank 0, which records the final pairing.
    bool found = false;
    for (const auto& p : r.per_rank[0].pairs)
      if (p.extremum == 1) found = p.saddle == 13 && p.saddle_owner == 2;
    CHECK(found);
    CHECK(r.per_rank[0].unpaired == std::vector<Index>{0});
  }
}

TEST_CASE("distributed pairing equals the sequential sweep on random graphs") {
  for (int trial = 0; trial < 120; ++trial) {
    std::mt19937_64 rng(trial);
    const int ranks = 1 + trial % 4;
    const int nn = 2 + static_cast<int>(rng() % 25);
    const int ns = static_cast<int>(rng() % 50);
    Instance in;
    std::vector<Index> perm(nn);
    std::iota(perm.begin(), perm.end(), Index{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    for (int i = 0; i < nn; ++i) {
      in.node_age.push_back(age_of(perm[i]));
      in.node_owner.push_back(static_cast<int>(rng() % ranks));
    }
    std::vector<Index> sperm(ns);
    std::iota(sperm.begin(), sperm.end(), Index{0});
    std::shuffle(sperm.begin(), sperm.end(), rng);
    for (int s = 0; s < ns; ++s) {
      const Index a = static_cast<Index>(rng() % nn), b = static_cast<Index>(rng() % nn);
      if (a == b) continue;
      in.saddles.push_back({100 + s, age_of(sperm[s]), a, b});
      in.saddle_owner.push_back(static_cast<int>(rng() % ranks));
    }
    const ExtremumRun r = run_extrema(in, ranks, static_cast<std::uint64_t>(trial));
    CHECK_MESSAGE(gathered(r) == sequential_pairs(in), "trial " << trial);
  }
}

TEST_CASE("an empty graph is quiescent at once") {
  Transport t(3);
  std::vector<ExtremumPairingStats> st(3);
  run_ranks(t, [&](int r) {
    const DistributedPairs p = self_correcting_pairing(r, LocalGraph{}, t, {}, &st[r]);
    CHECK(p.pairs.empty());
    CHECK(p.unpaired.empty());
  });
  for (const auto& s : st) CHECK(s.rounds <= 1);
}

TEST_CASE("extremum ownership") {
  const std::vector<int> both = {1, 2};
  CHECK(extremum_owner(0, both) == 1);
  CHECK(extremum_owner(2, both) == 2);
  CHECK(extremum_owner(1, std::vector<int>{1}) == 1);
  CHECK(extremum_owner(3, std::vector<int>{0, 2, 3}) == 3);

  const auto g = ownership_graphs();
  CHECK(g[0].nodes.empty());
  CHECK(g[2].saddles.size() == 1);
  for (int r : {1, 2}) {
    REQUIRE(g[r].nodes.size() == 2);
    for (const GraphNode& n : g[r].nodes) {
      CHECK(n.owner == (n.id == 0 ? 1 : 2));
      if (n.owner == r)
        CHECK(n.ghost_ranks == std::vector<int>{r == 1 ? 2 : 1});
      else
        CHECK(n.ghost_ranks.empty());
    }
  }
}

TEST_CASE("distributed v-path tracing finds the sequential endpoints") {
  const GridShape s{9, 8, 5};
  const Grid grid(s);
  const auto f = generate_field(FieldKind::Random, s, 21);
  const GlobalOrder global = order_sequential(f);

  // Sequential endpoints per critical edge.
  const Partition whole(grid, Layout{});
  const DiscreteGradient full = compute_gradient(whole.block(0), global);
  const CriticalSet full_critical = extract_critical(full, whole.block(0), global);
  const ExtremumGraph eg = build_extremum_graph(grid, full, full_critical, global, Side::Min);
  std::map<Index, std::pair<Index, Index>> expect;
  for (const Triplet& tr : eg.triplets) {
    const Index a = eg.extrema[tr.t0].index, b = eg.extrema[tr.t1].index;
    expect[eg.saddles[tr.saddle].index] = std::minmax(a, b);
  }

  for (Layout layout : {Layout{1, 1, 1}, Layout{2, 1, 1}, Layout{2, 2, 2}}) {
    const Partition p(grid, layout);
    Transport t(p.ranks(), {3});
    std::vector<std::vector<TracedSaddle>> traced(p.ranks());
    std::vector<SetTracingStats> st(p.ranks());
    run_ranks(t, [&](int r) {
      const GhostedBlock& b = p.block(r);
      std::vector<Index> lo(static_cast<std::size_t>(b.local().simplex_count(0)));
      for (Index v = 0; v < b.local().simplex_count(0); ++v)
        lo[v] = global[grid.vertex_index(b.to_global(b.local().vertex_coords(v)))];
      const DiscreteGradient g = compute_gradient(b, lo);
      const CriticalSet c = extract_critical(g, b, lo);
      traced[r] = distributed_sets(r, p, g, lo, Side::Min, c.by_dim[1], t, &st[r]);
    });
    std::map<Index, std::pair<Index, Index>> got;
    for (const auto& per : traced)
      for (const TracedSaddle& ts : per) {
        CHECK(ts.ends[0].home >= 0);
        CHECK(ts.ends[1].home >= 0);
        if (ts.ends[0].extremum != ts.ends[1].extremum)
          got[ts.id] = std::minmax(ts.ends[0].extremum, ts.ends[1].extremum);
      }
    CHECK(got == expect);
    if (p.ranks() == 1) CHECK(st[0].compute_rounds <= 1);
  }
}

TEST_CASE("a trace crossing one interface takes two compute rounds") {
  // Line 0..7 split in two; the minimum sits at the far end of rank 0,
  // the saddle near the interface on rank 1's side.
  const std::vector<double> f = {0, 1, 2, 3, 4, 6, 5, 7};
  const Grid grid({8, 1, 1});
  const GlobalOrder global = order_sequential(f);
  const Partition p(grid, {2, 1, 1});
  Transport t(2);
  std::vector<SetTracingStats> st(2);
  std::vector<std::vector<TracedSaddle>> traced(2);
  run_ranks(t, [&](int r) {
    const GhostedBlock& b = p.block(r);
    std::vector<Index> lo(static_cast<std::size_t>(b.local().simplex_count(0)));
    for (Index v = 0; v < b.local().simplex_count(0); ++v)
      lo[v] = global[grid.vertex_index(b.to_global(b.local().vertex_coords(v)))];
    const DiscreteGradient g = compute_gradient(b, lo);
    const CriticalSet c = extract_critical(g, b, lo);
    traced[r] = distributed_sets(r, p, g, lo, Side::Min, c.by_dim[1], t, &st[r]);
  });
  CHECK(traced[0].empty());
  REQUIRE(traced[1].size() == 1);
  const std::pair<Index, Index> ends = std::minmax(traced[1][0].ends[0].extremum, traced[1][0].ends[1].extremum);
  CHECK(ends == std::pair<Index, Index>{0, 6});
  CHECK(st[1].compute_rounds == 2);
  CHECK(st[0].compute_rounds == 2);
}
