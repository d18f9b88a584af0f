#include <algorithm>
#include <map>
#include <set>

#include "ddms/grid.hpp"
#include "ddms/order.hpp"
#include "ddms/partition.hpp"
#include "doctest.h"

using namespace ddms;

namespace {

// Brute-force enumeration of the Freudenthal complex: every cube's 6 paths
// from its (0,0,0) corner to (1,1,1) are tetrahedra; all their faces are
// simplices. Works for degenerate axes by clipping to the grid.
std::array<std::set<std::vector<Index>>, 4> enumerate(const GridShape& s) {
  std::array<std::set<std::vector<Index>>, 4> out;
  std::vector<int> live;
  for (int a = 0; a < 3; ++a)
    if (s[a] > 1) live.push_back(a);
  auto idx = [&](Index x, Index y, Index z) { return x + s.nx * (y + s.ny * z); };
  auto range = [&](int a) { return s[a] > 1 ? s[a] - 1 : Index{1}; };
  for (Index z = 0; z < range(2); ++z)
    for (Index y = 0; y < range(1); ++y)
      for (Index x = 0; x < range(0); ++x) {
        std::vector<int> perm = live;
        do {
          std::vector<Index> cell;
          Index c[3] = {x, y, z};
          cell.push_back(idx(c[0], c[1], c[2]));
          for (int a : perm) {
            ++c[a];
            cell.push_back(idx(c[0], c[1], c[2]));
          }
          const int k = static_cast<int>(cell.size());
          for (int mask = 1; mask < (1 << k); ++mask) {
            std::vector<Index> face;
            for (int i = 0; i < k; ++i)
              if (mask >> i & 1) face.push_back(cell[i]);
            std::sort(face.begin(), face.end());
            out[face.size() - 1].insert(face);
          }
        } while (std::next_permutation(perm.begin(), perm.end()));
      }
  return out;
}

}  // namespace

TEST_CASE("simplex counts of small grids") {
  const Grid square({2, 2, 1});
  CHECK(square.simplex_count(0) == 4);
  CHECK(square.simplex_count(1) == 5);
  CHECK(square.simplex_count(2) == 2);
  CHECK(square.simplex_count(3) == 0);

  const Grid cube({2, 2, 2});
  CHECK(cube.simplex_count(0) == 8);
  CHECK(cube.simplex_count(1) == 19);
  CHECK(cube.simplex_count(2) == 18);
  CHECK(cube.simplex_count(3) == 6);
  CHECK(Grid({3, 2, 2}).simplex_count(3) == 12);
}

TEST_CASE("counts and vertex sets match brute-force enumeration") {
  for (GridShape s : {GridShape{2, 2, 2}, GridShape{3, 3, 3}, GridShape{4, 3, 2}, GridShape{5, 4, 1},
                      GridShape{6, 1, 1}}) {
    const Grid g(s);
    const auto ref = enumerate(s);
    Index chi = 0;
    for (int d = 0; d <= 3; ++d) {
      CHECK(g.simplex_count(d) == static_cast<Index>(ref[d].size()));
      std::set<std::vector<Index>> got;
      for (Index i = 0; i < g.simplex_count(d); ++i) {
        const VertexList v = g.vertices({d, i});
        got.insert(std::vector<Index>(v.begin(), v.end()));
      }
      CHECK(got == ref[d]);
      chi += (d % 2 ? -1 : 1) * g.simplex_count(d);
    }
    CHECK(chi == 1);
  }
}

TEST_CASE("faces and cofacets are inverse incidences") {
  const Grid g({4, 4, 4});
  Index handshake = 0;
  for (int d = 1; d <= 3; ++d)
    for (Index i = 0; i < g.simplex_count(d); ++i) {
      const SimplexId s{d, i};
      const SimplexList f = g.faces(s);
      REQUIRE(f.size() == static_cast<std::size_t>(d + 1));
      for (const SimplexId& face : f) {
        CHECK(face.dim == d - 1);
        const SimplexList co = g.cofacets(face);
        CHECK(std::find(co.begin(), co.end(), s) != co.end());
      }
    }
  for (int d = 0; d <= 2; ++d)
    for (Index i = 0; i < g.simplex_count(d); ++i)
      for (const SimplexId& c : g.cofacets({d, i})) {
        const SimplexList f = g.faces(c);
        CHECK(std::find(f.begin(), f.end(), SimplexId{d, i}) != f.end());
      }
  for (Index i = 0; i < g.simplex_count(1); ++i) handshake += static_cast<Index>(g.cofacets({1, i}).size());
  CHECK(handshake == 3 * g.simplex_count(2));
}

TEST_CASE("triangle cofacet counts distinguish interior from boundary") {
  const Grid g({3, 3, 3});
  int interior = 0, boundary = 0;
  for (Index i = 0; i < g.simplex_count(2); ++i) {
    const auto co = g.cofacets({2, i});
    CHECK((co.size() == 1 || co.size() == 2));
    (co.size() == 2 ? interior : boundary)++;
  }
  CHECK(interior > 0);
  CHECK(boundary > 0);
  // Each tet has 4 triangles; boundary ones are counted once.
  CHECK(2 * interior + boundary == 4 * g.simplex_count(3));
}

TEST_CASE("from_vertices inverts vertices") {
  const Grid g({3, 4, 2});
  for (int d = 0; d <= 3; ++d)
    for (Index i = 0; i < g.simplex_count(d); ++i) {
      const VertexList v = g.vertices({d, i});
      const auto back = g.from_vertices(v.span());
      REQUIRE(back.has_value());
      CHECK(*back == SimplexId{d, i});
    }
}

TEST_CASE("oversized grids are rejected") {
  CHECK_THROWS_AS(Grid({1 << 22, 1 << 22, 1 << 22}), SizingError);
}

TEST_CASE("partition tiles and ghost layers") {
  const Grid g({8, 2, 2});
  const Partition p(g, {2, 1, 1});
  REQUIRE(p.ranks() == 2);
  CHECK(p.block(0).ghosted().shape() == GridShape{5, 2, 2});
  CHECK(p.block(1).ghosted().shape() == GridShape{5, 2, 2});
  CHECK(p.vertex_owner(Coords{3, 0, 0}) == 0);
  CHECK(p.vertex_owner(Coords{4, 1, 1}) == 1);
  CHECK(p.ghost_ranks(Coords{4, 0, 0}) == std::vector<int>{0});
  CHECK(p.ghost_ranks(Coords{0, 0, 0}).empty());

  const Partition single(g, {1, 1, 1});
  CHECK(single.block(0).ghosted() == single.block(0).owned());

  CHECK_THROWS(Partition(Grid({2, 2, 2}), {3, 1, 1}));
}

TEST_CASE("owned simplices sum to the global counts and owners agree") {
  const Grid g({9, 9, 5});
  std::vector<double> f(static_cast<std::size_t>(g.simplex_count(0)));
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = static_cast<double>((i * 7919) % 997);
  const GlobalOrder order = order_sequential(f);
  const Partition p(g, {2, 2, 1});
  for (int d = 0; d <= 3; ++d) {
    std::map<Index, int> owner;
    Index owned = 0;
    bool agree = true;
    for (const GhostedBlock& b : p.blocks()) {
      std::vector<Index> local_order(static_cast<std::size_t>(b.local().simplex_count(0)));
      for (Index v = 0; v < b.local().simplex_count(0); ++v)
        local_order[v] = order[g.vertex_index(b.to_global(b.local().vertex_coords(v)))];
      for (Index i = 0; i < b.local().simplex_count(d); ++i) {
        const int o = simplex_owner(p, b, local_order, {d, i});
        const Index gid = b.to_global(g, {d, i}).index;
        auto [it, fresh] = owner.emplace(gid, o);
        if (!fresh && it->second != o) agree = false;
        if (o == b.rank()) ++owned;
      }
    }
    CHECK(agree);
    CHECK(owned == g.simplex_count(d));
    CHECK(static_cast<Index>(owner.size()) == g.simplex_count(d));
  }
}
