#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ddms/order.hpp"
#include "ddms/partition.hpp"
#include "ddms/transport.hpp"
#include "doctest.h"

using namespace ddms;

namespace {

std::vector<double> random_field(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, 40);  // plenty of ties
  std::vector<double> f(static_cast<std::size_t>(n));
  for (double& v : f) v = pick(rng);
  return f;
}

// Reference: argsort by (value, id).
GlobalOrder reference_order(const std::vector<double>& f) {
  std::vector<Index> ids(f.size());
  std::iota(ids.begin(), ids.end(), Index{0});
  std::sort(ids.begin(), ids.end(), [&](Index a, Index b) { return std::tie(f[a], a) < std::tie(f[b], b); });
  GlobalOrder out(f.size());
  for (std::size_t r = 0; r < ids.size(); ++r) out[ids[r]] = static_cast<Index>(r);
  return out;
}

std::vector<GlobalOrder> run_distributed(const Grid& g, Layout layout, const std::vector<double>& f,
                                         std::uint64_t seed) {
  const Partition p(g, layout);
  Transport t(p.ranks(), {seed});
  std::vector<GlobalOrder> out(p.ranks());
  run_ranks(t, [&](int r) {
    const GhostedBlock& b = p.block(r);
    std::vector<double> local(static_cast<std::size_t>(b.local().simplex_count(0)));
    for (Index v = 0; v < b.local().simplex_count(0); ++v)
      local[v] = f[g.vertex_index(b.to_global(b.local().vertex_coords(v)))];
    out[r] = order_distributed(r, p, local, t);
  });
  return out;
}

}  // namespace

TEST_CASE("sequential order examples") {
  CHECK(order_sequential(std::vector<double>{3.0, 1.0, 2.0}) == GlobalOrder{2, 0, 1});
  CHECK(order_sequential(std::vector<double>{5.0, 5.0, 5.0}) == GlobalOrder{0, 1, 2});
  CHECK_THROWS(order_sequential(std::vector<double>{1.0, std::nan(""), 0.0}));
}

TEST_CASE("sequential order is the (value, id) argsort") {
  const auto f = random_field(1000, 5);
  CHECK(order_sequential(f) == reference_order(f));
}

TEST_CASE("distributed order equals the sequential order on every block") {
  const Grid g({9, 9, 5});
  for (Layout layout : {Layout{1, 1, 1}, Layout{2, 2, 1}, Layout{2, 2, 2}, Layout{3, 1, 2}}) {
    for (std::uint64_t seed : {1u, 2u}) {
      const auto f = random_field(g.simplex_count(0), seed);
      const GlobalOrder ref = order_sequential(f);
      const auto per_rank = run_distributed(g, layout, f, seed);
      const Partition p(g, layout);
      bool equal = true;
      for (int r = 0; r < p.ranks(); ++r) {
        const GhostedBlock& b = p.block(r);
        for (Index v = 0; v < b.local().simplex_count(0); ++v)
          if (per_rank[r][v] != ref[g.vertex_index(b.to_global(b.local().vertex_coords(v)))]) equal = false;
      }
      CHECK(equal);
    }
  }
}

TEST_CASE("equal scalars order by vertex id across two processes") {
  const Grid g({6, 3, 1});
  const std::vector<double> f(18, 1.5);
  const auto per_rank = run_distributed(g, {2, 1, 1}, f, 0);
  const Partition p(g, {2, 1, 1});
  for (int r = 0; r < 2; ++r) {
    const GhostedBlock& b = p.block(r);
    for (Index v = 0; v < b.local().simplex_count(0); ++v)
      CHECK(per_rank[r][v] == g.vertex_index(b.to_global(b.local().vertex_coords(v))));
  }
}

TEST_CASE("simplex keys are lexicographic and faces come first") {
  const Grid g({3, 3, 3});
  const auto f = random_field(g.simplex_count(0), 9);
  const GlobalOrder order = order_sequential(f);
  for (int d = 1; d <= 3; ++d)
    for (Index i = 0; i < g.simplex_count(d); ++i) {
      const SimplexKey k = simplex_key(g, order, {d, i});
      for (int j = 0; j < d; ++j) CHECK(k[j] > k[j + 1]);
      for (int j = d + 1; j < 4; ++j) CHECK(k[j] == -1);
      for (const SimplexId& face : g.faces({d, i})) CHECK(simplex_key(g, order, face) < k);
      CHECK(compare(k, k) == std::strong_ordering::equal);
    }
  // Keys are distinct within a dimension.
  for (int d = 0; d <= 3; ++d) {
    std::vector<SimplexKey> keys;
    for (Index i = 0; i < g.simplex_count(d); ++i) keys.push_back(simplex_key(g, order, {d, i}));
    std::sort(keys.begin(), keys.end());
    CHECK(std::adjacent_find(keys.begin(), keys.end()) == keys.end());
  }
  CHECK(SimplexKey{7, 2, -1, -1} < SimplexKey{7, 3, -1, -1});
}
