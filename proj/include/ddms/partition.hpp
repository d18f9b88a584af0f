#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ddms/grid.hpp"

namespace ddms {

/// Half-open vertex box [lo, hi) in global coordinates.
struct Box {
  Coords lo{};
  Coords hi{};

  bool contains(const Coords& c) const {
    for (int a = 0; a < 3; ++a)
      if (c[a] < lo[a] || c[a] >= hi[a]) return false;
    return true;
  }
  GridShape shape() const { return {hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]}; }
  bool operator==(const Box&) const = default;
};

/// Number of blocks along each axis; ranks are numbered x-fastest.
struct Layout {
  int sx = 1;
  int sy = 1;
  int sz = 1;

  int ranks() const { return sx * sy * sz; }
  int operator[](int axis) const { return axis == 0 ? sx : axis == 1 ? sy : sz; }
};

/// One process's share of the grid: an owned vertex tile plus a one-vertex
/// ghost layer, with a local grid over the ghosted box.
///
/// Vertices are owned by the tile containing them. A higher simplex is owned
/// by the owner of its highest-ordered vertex, so the process owning a vertex
/// owns its whole lower star (see simplex_owner()).
class GhostedBlock {
 public:
  GhostedBlock(int rank, Box owned, Box ghosted);

  int rank() const { return rank_; }
  const Box& owned() const { return owned_; }
  const Box& ghosted() const { return ghosted_; }
  const Grid& local() const { return local_; }

  Coords to_global(const Coords& local) const {
    return {local[0] + ghosted_.lo[0], local[1] + ghosted_.lo[1], local[2] + ghosted_.lo[2]};
  }
  Coords to_local(const Coords& global) const {
    return {global[0] - ghosted_.lo[0], global[1] - ghosted_.lo[1], global[2] - ghosted_.lo[2]};
  }
  SimplexId to_global(const Grid& global, SimplexId local) const;
  /// nullopt when the simplex is not inside the ghosted box.
  std::optional<SimplexId> to_local(const Grid& global, SimplexId global_id) const;
  bool owns_local_vertex(Index local_vertex) const { return owned_.contains(to_global(local_.vertex_coords(local_vertex))); }

 private:
  int rank_;
  Box owned_;
  Box ghosted_;
  Grid local_;
};

class Partition {
 public:
  /// Splits the vertex grid into layout.ranks() tiles; rejects empty tiles.
  Partition(const Grid& grid, Layout layout);

  const Grid& grid() const { return *grid_; }
  const Layout& layout() const { return layout_; }
  int ranks() const { return layout_.ranks(); }
  const GhostedBlock& block(int rank) const { return blocks_[rank]; }
  const std::vector<GhostedBlock>& blocks() const { return blocks_; }

  int vertex_owner(const Coords& global) const;
  int vertex_owner(Index global_vertex) const { return vertex_owner(grid_->vertex_coords(global_vertex)); }
  /// Ranks other than the owner whose ghosted box contains the vertex, ascending.
  std::vector<int> ghost_ranks(const Coords& global) const;

 private:
  const Grid* grid_;
  Layout layout_;
  std::array<std::vector<Index>, 3> cuts_;
  std::vector<GhostedBlock> blocks_;
};

/// Owner of a block-local simplex: the owner of its highest-ordered vertex.
/// local_order holds the global vertex order for every vertex of the ghosted box.
int simplex_owner(const Partition& partition, const GhostedBlock& block, std::span<const Index> local_order,
                  SimplexId local);

}  // namespace ddms
