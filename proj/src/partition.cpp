#include "ddms/partition.hpp"

#include <algorithm>
#include <string>

namespace ddms {

GhostedBlock::GhostedBlock(int rank, Box owned, Box ghosted)
    : rank_(rank), owned_(owned), ghosted_(ghosted), local_(ghosted.shape()) {}

SimplexId GhostedBlock::to_global(const Grid& global, SimplexId local) const {
  const auto d = local_.decode(local);
  return global.encode(local.dim, d.type, to_global(d.base));
}

std::optional<SimplexId> GhostedBlock::to_local(const Grid& global, SimplexId global_id) const {
  const auto d = global.decode(global_id);
  const Coords base = to_local(d.base);
  if (!local_.fits(global_id.dim, d.type, base)) return std::nullopt;
  return local_.encode(global_id.dim, d.type, base);
}

Partition::Partition(const Grid& grid, Layout layout) : grid_(&grid), layout_(layout) {
  const GridShape& shape = grid.shape();
  for (int a = 0; a < 3; ++a) {
    const Index n = shape[a];
    const int s = layout[a];
    if (s < 1 || s > n)
      throw std::invalid_argument("axis " + std::to_string(a) + " split count " + std::to_string(s) +
                                  " leaves an empty block");
    for (int i = 0; i <= s; ++i) cuts_[a].push_back(static_cast<Index>(i) * n / s);
  }
  for (int iz = 0; iz < layout.sz; ++iz)
    for (int iy = 0; iy < layout.sy; ++iy)
      for (int ix = 0; ix < layout.sx; ++ix) {
        const std::array<int, 3> tile = {ix, iy, iz};
        Box owned, ghosted;
        for (int a = 0; a < 3; ++a) {
          owned.lo[a] = cuts_[a][tile[a]];
          owned.hi[a] = cuts_[a][tile[a] + 1];
          ghosted.lo[a] = std::max<Index>(0, owned.lo[a] - 1);
          ghosted.hi[a] = std::min<Index>(shape[a], owned.hi[a] + 1);
        }
        blocks_.emplace_back(static_cast<int>(blocks_.size()), owned, ghosted);
      }
}

int Partition::vertex_owner(const Coords& c) const {
  std::array<int, 3> tile{};
  for (int a = 0; a < 3; ++a) {
    const auto& cut = cuts_[a];
    tile[a] = static_cast<int>(std::upper_bound(cut.begin(), cut.end(), c[a]) - cut.begin()) - 1;
  }
  return tile[0] + layout_.sx * (tile[1] + layout_.sy * tile[2]);
}

std::vector<int> Partition::ghost_ranks(const Coords& c) const {
  std::vector<int> out;
  const int owner = vertex_owner(c);
  for (const auto& b : blocks_)
    if (b.rank() != owner && b.ghosted().contains(c)) out.push_back(b.rank());
  return out;
}

int simplex_owner(const Partition& partition, const GhostedBlock& block, std::span<const Index> local_order,
                  SimplexId local) {
  const VertexList verts = block.local().vertices(local);
  Index top = verts[0];
  for (Index v : verts)
    if (local_order[v] > local_order[top]) top = v;
  return partition.vertex_owner(block.to_global(block.local().vertex_coords(top)));
}

}  // namespace ddms
