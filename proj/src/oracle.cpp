#include "ddms/oracle.hpp"

#include <algorithm>
#include <numeric>

#include "ddms/order.hpp"

namespace ddms {

Diagram reduce_matrix(const Grid& grid, std::span<const Index> order, std::span<const double> scalars) {
  Index total = 0;
  for (int d = 0; d <= 3; ++d) total += grid.simplex_count(d);
  if (total > kOracleSimplexLimit)
    throw SizingError("matrix oracle limited to " + std::to_string(kOracleSimplexLimit) + " simplices, grid has " +
                      std::to_string(total));

  struct Entry {
    SimplexKey key;
    SimplexId id;
  };
  std::vector<Entry> cells;
  cells.reserve(total);
  for (int d = 0; d <= 3; ++d)
    for (Index i = 0; i < grid.simplex_count(d); ++i) cells.push_back({simplex_key(grid, order, {d, i}), {d, i}});
  std::sort(cells.begin(), cells.end(), [](const Entry& a, const Entry& b) { return a.key < b.key; });

  std::array<std::vector<std::int32_t>, 4> position;
  for (int d = 0; d <= 3; ++d) position[d].resize(grid.simplex_count(d));
  for (std::size_t j = 0; j < cells.size(); ++j) position[cells[j].id.dim][cells[j].id.index] = static_cast<std::int32_t>(j);

  std::vector<std::vector<std::int32_t>> columns(cells.size());
  std::vector<std::int32_t> column_with_low(cells.size(), -1);
  std::vector<char> paired(cells.size(), 0);
  std::vector<std::int32_t> scratch;
  Diagram out;

  for (std::size_t j = 0; j < cells.size(); ++j) {
    auto& col = columns[j];
    if (cells[j].id.dim > 0) {
      for (const SimplexId& f : grid.faces(cells[j].id)) col.push_back(position[f.dim][f.index]);
      std::sort(col.begin(), col.end());
    }
    while (!col.empty() && column_with_low[col.back()] >= 0) {
      const auto& other = columns[column_with_low[col.back()]];
      scratch.clear();
      std::set_symmetric_difference(col.begin(), col.end(), other.begin(), other.end(), std::back_inserter(scratch));
      col.swap(scratch);
    }
    if (!col.empty()) {
      const std::int32_t low = col.back();
      column_with_low[low] = static_cast<std::int32_t>(j);
      paired[low] = paired[j] = 1;
      const SimplexId birth = cells[low].id;
      out.pairs.push_back(make_pair(grid, order, scalars, birth.dim, birth, cells[j].id));
    } else {
      col.shrink_to_fit();
    }
  }
  for (std::size_t j = 0; j < cells.size(); ++j)
    if (!paired[j]) out.infinite.push_back(make_infinite(grid, order, scalars, cells[j].id.dim, cells[j].id));
  out.canonicalize();
  return out;
}

Diagram d0_unionfind(const Grid& grid, std::span<const Index> order, std::span<const double> scalars) {
  const Index n = grid.simplex_count(0);
  std::vector<Index> by_order(n);
  for (Index v = 0; v < n; ++v) by_order[order[v]] = v;

  std::vector<Index> parent(n);
  std::iota(parent.begin(), parent.end(), Index{0});
  // Roots are component minima, so the root with the lower order is the elder.
  auto find = [&](Index v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  };

  Diagram out;
  std::vector<std::pair<Index, SimplexId>> lower_edges;
  for (Index v : by_order) {
    lower_edges.clear();
    for (const SimplexId& e : grid.cofacets({0, v})) {
      const VertexList ends = grid.vertices(e);
      const Index u = ends[0] == v ? ends[1] : ends[0];
      if (order[u] < order[v]) lower_edges.emplace_back(order[u], e);
    }
    std::sort(lower_edges.begin(), lower_edges.end());
    for (const auto& [uo, e] : lower_edges) {
      const Index ru = find(by_order[uo]);
      const Index rv = find(v);
      if (ru == rv) continue;
      const Index young = order[ru] > order[rv] ? ru : rv;
      const Index old = young == ru ? rv : ru;
      parent[young] = old;
      out.pairs.push_back(make_pair(grid, order, scalars, 0, {0, young}, e));
    }
  }
  for (Index v = 0; v < n; ++v)
    if (find(v) == v) out.infinite.push_back(make_infinite(grid, order, scalars, 0, {0, v}));
  out.canonicalize();
  return out;
}

}  // namespace ddms
