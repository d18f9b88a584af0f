#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ddms {

using Index = std::int64_t;

/// Raised when a grid does not fit the simplex id space.
class SizingError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Vertex counts per axis. nz = 1 for 2D data, ny = nz = 1 for 1D data.
struct GridShape {
  Index nx = 1;
  Index ny = 1;
  Index nz = 1;

  Index vertex_count() const { return nx * ny * nz; }
  Index operator[](int axis) const { return axis == 0 ? nx : axis == 1 ? ny : nz; }
  bool operator==(const GridShape&) const = default;
};

struct SimplexId {
  int dim = 0;
  Index index = 0;

  auto operator<=>(const SimplexId&) const = default;
};

std::string to_string(const SimplexId& s);

using Coords = std::array<Index, 3>;

/// Small fixed-capacity list used for faces, cofacets and vertex sets.
template <typename T, std::size_t N>
class SmallList {
 public:
  void push_back(const T& v) { data_[size_++] = v; }
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  const T& operator[](std::size_t i) const { return data_[i]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T* begin() const { return data_.data(); }
  const T* end() const { return data_.data() + size_; }
  T* begin() { return data_.data(); }
  T* end() { return data_.data() + size_; }
  std::span<const T> span() const { return {data_.data(), size_}; }

 private:
  std::array<T, N> data_{};
  std::size_t size_ = 0;
};

using VertexList = SmallList<Index, 4>;
using SimplexList = SmallList<SimplexId, 16>;

/// Implicit Freudenthal (Kuhn) triangulation of a regular vertex grid.
///
/// Every simplex is a chain base, base+e(S1), ..., base+e(Sk) where
/// S1 < S2 < ... < Sk are strictly nested non-empty axis subsets and e(S) is
/// the 0/1 offset vector of S. Each unit cube is cut into 6 tetrahedra sharing
/// the (0,0,0)-(1,1,1) diagonal; each unit square into 2 triangles sharing
/// its (0,0)-(1,1) diagonal.
///
/// Ids are dense per dimension: simplices of one chain type form a sub-grid
/// of base vertices, and a type's block of ids starts at a fixed offset.
/// Type table (axis masks x=1, y=2, z=4):
///   dim 1: S1 in {1,2,4,3,5,6,7}
///   dim 2: (S1,S2) in {(1,3),(2,3),(1,5),(4,5),(2,6),(4,6),
///                      (1,7),(2,7),(4,7),(3,7),(5,7),(6,7)}
///   dim 3: (S1,S2,7) for the 6 axis permutations
class Grid {
 public:
  static constexpr int kNeighborSlots = 14;

  explicit Grid(GridShape shape);

  const GridShape& shape() const { return shape_; }
  /// Number of axes with more than one vertex.
  int dimension() const { return dimension_; }
  Index simplex_count(int dim) const { return counts_[dim]; }

  Index vertex_index(Index x, Index y, Index z) const { return x + shape_.nx * (y + shape_.ny * z); }
  Index vertex_index(const Coords& c) const { return vertex_index(c[0], c[1], c[2]); }
  Coords vertex_coords(Index v) const;
  bool contains(const Coords& c) const;

  /// Vertices of s in chain order (ascending vertex index).
  VertexList vertices(SimplexId s) const;
  /// Inverse of vertices(); nullopt if the set is not a simplex of the grid.
  std::optional<SimplexId> from_vertices(std::span<const Index> verts) const;

  /// dim+1 facets, obtained by dropping each chain vertex in turn.
  SimplexList faces(SimplexId s) const;
  /// All (dim+1)-simplices containing s, ascending by index.
  SimplexList cofacets(SimplexId s) const;

  bool valid(SimplexId s) const { return s.dim >= 0 && s.dim <= 3 && s.index >= 0 && s.index < counts_[s.dim]; }

  /// Chain-type description of an id: type number and base vertex coordinates.
  struct Decoded {
    int type = 0;
    Coords base{};
  };
  Decoded decode(SimplexId s) const;
  SimplexId encode(int dim, int type, const Coords& base) const;
  /// Whether a chain of the given type based at base lies in the grid.
  bool fits(int dim, int type, const Coords& base) const;

  // Static chain tables shared by every grid.
  static int type_count(int dim);
  /// Axis mask of the i-th chain step (i in 1..dim) of a type.
  static int chain_mask(int dim, int type, int step);
  static Coords mask_offset(int mask) { return {mask & 1, (mask >> 1) & 1, (mask >> 2) & 1}; }
  /// Offset of Freudenthal neighbor slot k (0..13): +e(S) for k<7, -e(S) otherwise.
  static std::array<int, 3> neighbor_offset(int slot);

  void require_valid(SimplexId s) const;

 private:
  Index type_extent_count(int dim, int type) const;

  GridShape shape_;
  int dimension_ = 0;
  std::array<Index, 4> counts_{};
  std::array<std::array<Index, 13>, 4> type_offsets_{};
};

}  // namespace ddms
