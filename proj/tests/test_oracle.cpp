#include <algorithm>

#include "ddms/field.hpp"
#include "ddms/oracle.hpp"
#include "ddms/order.hpp"
#include "doctest.h"

using namespace ddms;

namespace {

Diagram only_dim(const Diagram& d, int dim) {
  Diagram out;
  for (const auto& p : d.pairs)
    if (p.dim == dim) out.pairs.push_back(p);
  for (const auto& c : d.infinite)
    if (c.dim == dim) out.infinite.push_back(c);
  return out;
}

}  // namespace

TEST_CASE("a single cube is a ball") {
  const Grid g({2, 2, 2});
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto f = generate_field(FieldKind::Random, g.shape(), seed);
    const Diagram d = reduce_matrix(g, order_sequential(f), f);
    CHECK(d.infinite_count(0) == 1);
    CHECK(d.infinite_count(1) == 0);
    CHECK(d.infinite_count(2) == 0);
    CHECK(d.infinite_count(3) == 0);
  }
}

TEST_CASE("elevation ramp gives a single infinite pair") {
  const GridShape s{5, 5, 5};
  const auto f = generate_field(FieldKind::Elevation, s);
  const Diagram d = reduce_matrix(Grid(s), order_sequential(f), f);
  CHECK(d.pairs.empty());
  CHECK(d.infinite.size() == 1);
}

TEST_CASE("union-find and matrix reduction agree on D0") {
  for (GridShape s : {GridShape{5, 5, 5}, GridShape{10, 7, 1}, GridShape{25, 1, 1}}) {
    const Grid g(s);
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
      const auto f = generate_field(FieldKind::Random, s, seed);
      const GlobalOrder o = order_sequential(f);
      const Diagram a = only_dim(reduce_matrix(g, o, f), 0);
      const Diagram b = d0_unionfind(g, o, f);
      CHECK(same_diagram(a, b));
    }
  }
}

TEST_CASE("pairs are well formed") {
  const GridShape s{4, 4, 3};
  const auto f = generate_field(FieldKind::Random, s, 13);
  const Diagram d = reduce_matrix(Grid(s), order_sequential(f), f);
  for (const auto& p : d.pairs) {
    CHECK(p.death_order > p.birth_order);
    CHECK(p.death_value >= p.birth_value);
    CHECK(p.birth.dim == p.dim);
    CHECK(p.death.dim == p.dim + 1);
  }
  // Euler characteristic from the diagram: infinite classes give the Betti numbers.
  CHECK(d.infinite.size() == 1);
}

TEST_CASE("two-well line: one finite pair at the higher minimum") {
  const std::vector<double> f = {0, 2, 4, 1, 3};
  const Grid g({5, 1, 1});
  const Diagram d = d0_unionfind(g, order_sequential(f), f);
  REQUIRE(d.pairs.size() == 1);
  CHECK(d.pairs[0].birth_value == 1);
  CHECK(d.pairs[0].death_value == 4);
  CHECK(d.infinite.size() == 1);
  CHECK(d.infinite[0].birth_value == 0);
}

TEST_CASE("monotone field has no finite D0 pairs") {
  const GridShape s{6, 6, 1};
  const auto f = generate_field(FieldKind::Elevation, s);
  CHECK(d0_unionfind(Grid(s), order_sequential(f), f).pairs.empty());
}

TEST_CASE("matrix oracle refuses large grids") {
  const GridShape s{40, 40, 40};
  const std::vector<double> f(static_cast<std::size_t>(s.vertex_count()), 0.0);
  CHECK_THROWS_AS(reduce_matrix(Grid(s), order_sequential(f), f), SizingError);
}
