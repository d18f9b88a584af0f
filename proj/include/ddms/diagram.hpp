#pragma once

#include <ostream>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "ddms/grid.hpp"

namespace ddms {

/// Finite pair of a persistence diagram. Simplex ids are global; orders are
/// the order of the highest vertex of each simplex, values its scalar value.
struct PersistencePair {
  int dim = 0;
  SimplexId birth{};
  SimplexId death{};
  Index birth_order = 0;
  Index death_order = 0;
  double birth_value = 0;
  double death_value = 0;
  Index birth_vertex = 0;
  Index death_vertex = 0;

  bool operator==(const PersistencePair&) const = default;
};

struct InfiniteClass {
  int dim = 0;
  SimplexId birth{};
  Index birth_order = 0;
  double birth_value = 0;
  Index birth_vertex = 0;

  bool operator==(const InfiniteClass&) const = default;
};

struct Diagram {
  std::vector<PersistencePair> pairs;
  std::vector<InfiniteClass> infinite;

  /// Drops pairs with zero persistence in order (birth_order == death_order)
  /// and sorts by (dim, birth_order, death_order).
  void canonicalize();

  std::size_t finite_count(int dim) const;
  std::size_t infinite_count(int dim) const;
};

/// (dim, birth_order, death_order) triples; infinite classes use death -1.
using DiagramSignature = std::vector<std::tuple<int, Index, Index>>;

/// Comparison form: canonical, order-only, diagonal pairs removed.
DiagramSignature signature(const Diagram& d);

bool same_diagram(const Diagram& a, const Diagram& b);

/// Human-readable description of the first difference, empty if equal.
std::string describe_difference(const Diagram& a, const Diagram& b);

/// Pair / class of global simplices, orders and values taken from their top vertices.
PersistencePair make_pair(const Grid& grid, std::span<const Index> order, std::span<const double> scalars, int dim,
                          SimplexId birth, SimplexId death);
InfiniteClass make_infinite(const Grid& grid, std::span<const Index> order, std::span<const double> scalars, int dim,
                            SimplexId birth);

/// Fills birth/death values from the vertex ids (used after distributed gathers).
void fill_values(Diagram& d, std::span<const double> scalars);

void write_csv(std::ostream& out, const Diagram& d);
void write_json(std::ostream& out, const Diagram& d);

}  // namespace ddms
