#include "ddms/grid.hpp"

#include <algorithm>

namespace ddms {

namespace {

constexpr std::array<int, 7> kEdgeTypes = {1, 2, 4, 3, 5, 6, 7};
constexpr std::array<std::array<int, 2>, 12> kTriangleTypes = {{
    {1, 3}, {2, 3}, {1, 5}, {4, 5}, {2, 6}, {4, 6},
    {1, 7}, {2, 7}, {4, 7}, {3, 7}, {5, 7}, {6, 7},
}};
constexpr std::array<std::array<int, 3>, 6> kTetTypes = {{
    {1, 3, 7}, {1, 5, 7}, {2, 3, 7}, {2, 6, 7}, {4, 5, 7}, {4, 6, 7},
}};

struct ChainLookup {
  std::array<int, 8> edge{};
  std::array<std::array<int, 8>, 8> triangle{};
  std::array<std::array<int, 8>, 8> tet{};

  ChainLookup() {
    edge.fill(-1);
    for (auto& row : triangle) row.fill(-1);
    for (auto& row : tet) row.fill(-1);
    for (int t = 0; t < 7; ++t) edge[kEdgeTypes[t]] = t;
    for (int t = 0; t < 12; ++t) triangle[kTriangleTypes[t][0]][kTriangleTypes[t][1]] = t;
    for (int t = 0; t < 6; ++t) tet[kTetTypes[t][0]][kTetTypes[t][1]] = t;
  }
};

const ChainLookup& lookup() {
  static const ChainLookup table;
  return table;
}

Index checked_mul(Index a, Index b) {
  Index out = 0;
  if (__builtin_mul_overflow(a, b, &out)) throw SizingError("grid too large for the simplex id space");
  return out;
}

}  // namespace

std::string to_string(const SimplexId& s) { return std::to_string(s.dim) + ":" + std::to_string(s.index); }

int Grid::type_count(int dim) {
  switch (dim) {
    case 0: return 1;
    case 1: return 7;
    case 2: return 12;
    case 3: return 6;
    default: return 0;
  }
}

int Grid::chain_mask(int dim, int type, int step) {
  if (step == 0) return 0;
  switch (dim) {
    case 1: return kEdgeTypes[type];
    case 2: return kTriangleTypes[type][step - 1];
    case 3: return kTetTypes[type][step - 1];
    default: return 0;
  }
}

std::array<int, 3> Grid::neighbor_offset(int slot) {
  const int mask = (slot % 7) + 1;
  const int sign = slot < 7 ? 1 : -1;
  return {sign * (mask & 1), sign * ((mask >> 1) & 1), sign * ((mask >> 2) & 1)};
}

Grid::Grid(GridShape shape) : shape_(shape) {
  if (shape.nx < 1 || shape.ny < 1 || shape.nz < 1) throw std::invalid_argument("grid dimensions must be positive");
  // Edges dominate the per-vertex simplex budget (7 per vertex); guard that product.
  checked_mul(checked_mul(checked_mul(shape.nx, shape.ny), shape.nz), 16);
  dimension_ = (shape.nx > 1) + (shape.ny > 1) + (shape.nz > 1);
  for (int dim = 0; dim <= 3; ++dim) {
    Index running = 0;
    for (int t = 0; t < type_count(dim); ++t) {
      type_offsets_[dim][t] = running;
      running += type_extent_count(dim, t);
    }
    type_offsets_[dim][type_count(dim)] = running;
    counts_[dim] = running;
  }
}

Index Grid::type_extent_count(int dim, int type) const {
  const int extent = chain_mask(dim, type, dim);
  const Coords off = mask_offset(extent);
  return std::max<Index>(0, shape_.nx - off[0]) * std::max<Index>(0, shape_.ny - off[1]) *
         std::max<Index>(0, shape_.nz - off[2]);
}

Coords Grid::vertex_coords(Index v) const {
  const Index x = v % shape_.nx;
  const Index rest = v / shape_.nx;
  return {x, rest % shape_.ny, rest / shape_.ny};
}

bool Grid::contains(const Coords& c) const {
  return c[0] >= 0 && c[1] >= 0 && c[2] >= 0 && c[0] < shape_.nx && c[1] < shape_.ny && c[2] < shape_.nz;
}

void Grid::require_valid(SimplexId s) const {
  if (!valid(s)) throw std::out_of_range("invalid simplex id " + to_string(s));
}

Grid::Decoded Grid::decode(SimplexId s) const {
  Decoded d;
  if (s.dim == 0) {
    d.base = vertex_coords(s.index);
    return d;
  }
  int t = 0;
  while (s.index >= type_offsets_[s.dim][t + 1]) ++t;
  d.type = t;
  const Coords off = mask_offset(chain_mask(s.dim, t, s.dim));
  const Index sx = shape_.nx - off[0];
  const Index sy = shape_.ny - off[1];
  Index local = s.index - type_offsets_[s.dim][t];
  d.base[0] = local % sx;
  local /= sx;
  d.base[1] = local % sy;
  d.base[2] = local / sy;
  return d;
}

bool Grid::fits(int dim, int type, const Coords& base) const {
  if (base[0] < 0 || base[1] < 0 || base[2] < 0) return false;
  const Coords off = mask_offset(chain_mask(dim, type, dim));
  return base[0] + off[0] < shape_.nx && base[1] + off[1] < shape_.ny && base[2] + off[2] < shape_.nz;
}

SimplexId Grid::encode(int dim, int type, const Coords& base) const {
  if (dim == 0) return {0, vertex_index(base)};
  const Coords off = mask_offset(chain_mask(dim, type, dim));
  const Index sx = shape_.nx - off[0];
  const Index sy = shape_.ny - off[1];
  return {dim, type_offsets_[dim][type] + base[0] + sx * (base[1] + sy * base[2])};
}

VertexList Grid::vertices(SimplexId s) const {
  require_valid(s);
  VertexList out;
  const Decoded d = decode(s);
  for (int step = 0; step <= s.dim; ++step) {
    const Coords off = mask_offset(chain_mask(s.dim, d.type, step));
    out.push_back(vertex_index(d.base[0] + off[0], d.base[1] + off[1], d.base[2] + off[2]));
  }
  return out;
}

std::optional<SimplexId> Grid::from_vertices(std::span<const Index> verts) const {
  if (verts.empty() || verts.size() > 4) return std::nullopt;
  std::array<Index, 4> sorted{};
  std::copy(verts.begin(), verts.end(), sorted.begin());
  std::sort(sorted.begin(), sorted.begin() + verts.size());
  for (std::size_t i = 0; i < verts.size(); ++i)
    if (sorted[i] < 0 || sorted[i] >= counts_[0]) return std::nullopt;
  const int dim = static_cast<int>(verts.size()) - 1;
  const Coords base = vertex_coords(sorted[0]);
  std::array<int, 4> masks{};
  for (int i = 1; i <= dim; ++i) {
    const Coords c = vertex_coords(sorted[i]);
    int mask = 0;
    for (int a = 0; a < 3; ++a) {
      const Index delta = c[a] - base[a];
      if (delta < 0 || delta > 1) return std::nullopt;
      if (delta == 1) mask |= 1 << a;
    }
    if ((mask & masks[i - 1]) != masks[i - 1] || mask == masks[i - 1]) return std::nullopt;
    masks[i] = mask;
  }
  int type = 0;
  switch (dim) {
    case 0: break;
    case 1: type = lookup().edge[masks[1]]; break;
    case 2: type = lookup().triangle[masks[1]][masks[2]]; break;
    case 3: type = lookup().tet[masks[1]][masks[2]]; break;
  }
  if (type < 0) return std::nullopt;
  return encode(dim, type, base);
}

SimplexList Grid::faces(SimplexId s) const {
  if (s.dim < 1) throw std::invalid_argument("vertices have no facets");
  const VertexList verts = vertices(s);
  SimplexList out;
  for (std::size_t drop = 0; drop < verts.size(); ++drop) {
    std::array<Index, 3> rest{};
    std::size_t n = 0;
    for (std::size_t i = 0; i < verts.size(); ++i)
      if (i != drop) rest[n++] = verts[i];
    out.push_back(*from_vertices(std::span<const Index>(rest.data(), n)));
  }
  return out;
}

SimplexList Grid::cofacets(SimplexId s) const {
  if (s.dim > 2) throw std::invalid_argument("tetrahedra have no cofacets");
  const VertexList verts = vertices(s);
  const Coords base = vertex_coords(verts[0]);
  SimplexList out;
  std::array<Index, 4> candidate{};
  std::copy(verts.begin(), verts.end(), candidate.begin());
  for (int slot = 0; slot < kNeighborSlots; ++slot) {
    const auto off = neighbor_offset(slot);
    const Coords w = {base[0] + off[0], base[1] + off[1], base[2] + off[2]};
    if (!contains(w)) continue;
    candidate[verts.size()] = vertex_index(w);
    if (auto c = from_vertices(std::span<const Index>(candidate.data(), verts.size() + 1))) out.push_back(*c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace ddms
