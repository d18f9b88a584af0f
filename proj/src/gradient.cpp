#include "ddms/gradient.hpp"

#include <algorithm>
#include <thread>

namespace ddms {

namespace {

// A simplex of the star of a vertex v, described relative to v.
struct StarEntry {
  int dim = 0;
  int type = 0;
  std::array<int, 3> base_offset{};  // base = v + base_offset
  std::uint16_t neighbor_mask = 0;   // Freudenthal neighbor slots of the other vertices
};

int slot_of(const std::array<int, 3>& off) {
  int mask = 0;
  bool negative = false;
  for (int a = 0; a < 3; ++a) {
    if (off[a] != 0) mask |= 1 << a;
    if (off[a] < 0) negative = true;
  }
  return (negative ? 7 : 0) + mask - 1;
}

std::vector<StarEntry> build_star_table() {
  std::vector<StarEntry> table;
  for (int dim = 1; dim <= 3; ++dim)
    for (int type = 0; type < Grid::type_count(dim); ++type)
      for (int pos = 0; pos <= dim; ++pos) {
        StarEntry e;
        e.dim = dim;
        e.type = type;
        const Coords own = Grid::mask_offset(Grid::chain_mask(dim, type, pos));
        for (int a = 0; a < 3; ++a) e.base_offset[a] = -static_cast<int>(own[a]);
        for (int j = 0; j <= dim; ++j) {
          if (j == pos) continue;
          const Coords other = Grid::mask_offset(Grid::chain_mask(dim, type, j));
          std::array<int, 3> d{};
          for (int a = 0; a < 3; ++a) d[a] = static_cast<int>(other[a]) - static_cast<int>(own[a]);
          e.neighbor_mask |= static_cast<std::uint16_t>(1u << slot_of(d));
        }
        table.push_back(e);
      }
  return table;
}

const std::vector<StarEntry>& star_table() {
  static const std::vector<StarEntry> table = build_star_table();
  return table;
}

using LocalKey = std::array<Index, 3>;

struct LowerCell {
  int dim = 0;
  Index id = 0;
  std::uint16_t mask = 0;
  LocalKey key{-1, -1, -1};
  bool assigned = false;
};

// Processes the lower star of one vertex, following Robins et al.'s
// ProcessLowerStars with the homotopy-expansion queue discipline.
class LowerStarWorker {
 public:
  LowerStarWorker(const Grid& grid, std::span<const Index> order, DiscreteGradient& gradient)
      : grid_(grid), order_(order), gradient_(gradient) {
    index_.fill(-1);
  }

  void process(Index v) {
    collect(v);
    if (cells_.size() == 1) {
      gradient_.set_critical({0, v});
      clear();
      return;
    }
    // Steepest edge pairs with the vertex.
    int delta = -1;
    for (int i = 1; i < static_cast<int>(cells_.size()); ++i)
      if (cells_[i].dim == 1 && (delta < 0 || cells_[i].key < cells_[delta].key)) delta = i;
    cells_[0].assigned = true;
    cells_[delta].assigned = true;
    gradient_.set_pair({0, v}, {1, cells_[delta].id});

    zero_.clear();
    one_.clear();
    for (int i = 1; i < static_cast<int>(cells_.size()); ++i)
      if (cells_[i].dim == 1 && i != delta) zero_.push_back(i);
    push_cofacets(delta);

    while (!one_.empty() || !zero_.empty()) {
      while (!one_.empty()) {
        const int alpha = pop_min(one_);
        if (cells_[alpha].assigned) continue;
        const int unpaired = unpaired_faces(alpha);
        if (unpaired == 0) {
          zero_.push_back(alpha);
          continue;
        }
        const int face = unique_unpaired_face(alpha);
        cells_[alpha].assigned = true;
        cells_[face].assigned = true;
        gradient_.set_pair({cells_[face].dim, cells_[face].id}, {cells_[alpha].dim, cells_[alpha].id});
        push_cofacets(alpha);
        push_cofacets(face);
      }
      if (!zero_.empty()) {
        const int gamma = pop_min(zero_);
        if (cells_[gamma].assigned) continue;
        cells_[gamma].assigned = true;
        gradient_.set_critical({cells_[gamma].dim, cells_[gamma].id});
        push_cofacets(gamma);
      }
    }
    clear();
  }

 private:
  void collect(Index v) {
    const Coords c = grid_.vertex_coords(v);
    const Index ov = order_[v];
    std::uint16_t lower = 0;
    std::array<Index, Grid::kNeighborSlots> norder{};
    for (int s = 0; s < Grid::kNeighborSlots; ++s) {
      const auto off = Grid::neighbor_offset(s);
      const Coords w = {c[0] + off[0], c[1] + off[1], c[2] + off[2]};
      if (!grid_.contains(w)) continue;
      norder[s] = order_[grid_.vertex_index(w)];
      if (norder[s] < ov) lower |= static_cast<std::uint16_t>(1u << s);
    }
    cells_.clear();
    add_cell({0, v, 0, {-1, -1, -1}, false});
    if (lower == 0) return;
    for (const StarEntry& e : star_table()) {
      if ((e.neighbor_mask & lower) != e.neighbor_mask) continue;
      const Coords base = {c[0] + e.base_offset[0], c[1] + e.base_offset[1], c[2] + e.base_offset[2]};
      if (!grid_.fits(e.dim, e.type, base)) continue;
      LowerCell cell;
      cell.dim = e.dim;
      cell.id = grid_.encode(e.dim, e.type, base).index;
      cell.mask = e.neighbor_mask;
      int n = 0;
      for (int s = 0; s < Grid::kNeighborSlots; ++s)
        if (e.neighbor_mask & (1u << s)) cell.key[n++] = norder[s];
      std::sort(cell.key.begin(), cell.key.begin() + n, std::greater<>());
      add_cell(cell);
    }
  }

  void add_cell(const LowerCell& cell) {
    index_[cell.mask] = static_cast<std::int16_t>(cells_.size());
    cells_.push_back(cell);
  }

  void clear() {
    for (const auto& c : cells_) index_[c.mask] = -1;
  }

  int unpaired_faces(int alpha) const {
    int n = 0;
    const std::uint16_t m = cells_[alpha].mask;
    for (int s = 0; s < Grid::kNeighborSlots; ++s)
      if (m & (1u << s)) {
        const int f = index_[m & ~(1u << s)];
        if (f >= 0 && !cells_[f].assigned) ++n;
      }
    return n;
  }

  int unique_unpaired_face(int alpha) const {
    const std::uint16_t m = cells_[alpha].mask;
    for (int s = 0; s < Grid::kNeighborSlots; ++s)
      if (m & (1u << s)) {
        const int f = index_[m & ~(1u << s)];
        if (f >= 0 && !cells_[f].assigned) return f;
      }
    return -1;
  }

  void push_cofacets(int cell) {
    const std::uint16_t m = cells_[cell].mask;
    for (int s = 0; s < Grid::kNeighborSlots; ++s) {
      if (m & (1u << s)) continue;
      const int co = index_[m | (1u << s)];
      if (co >= 0 && !cells_[co].assigned && unpaired_faces(co) == 1) one_.push_back(co);
    }
  }

  int pop_min(std::vector<int>& queue) {
    auto best = queue.begin();
    for (auto it = queue.begin(); it != queue.end(); ++it)
      if (cells_[*it].key < cells_[*best].key) best = it;
    const int out = *best;
    queue.erase(best);
    return out;
  }

  const Grid& grid_;
  std::span<const Index> order_;
  DiscreteGradient& gradient_;
  std::vector<LowerCell> cells_;
  std::vector<int> zero_;
  std::vector<int> one_;
  std::array<std::int16_t, 1 << Grid::kNeighborSlots> index_;
};

}  // namespace

DiscreteGradient::DiscreteGradient(const Grid& local) {
  for (int d = 0; d <= 3; ++d) {
    if (local.simplex_count(d) >= (Index{1} << 30)) throw SizingError("block too large for gradient slots");
    slots_[d].assign(local.simplex_count(d), kUnset);
  }
}

Index DiscreteGradient::resident_slots() const {
  Index n = 0;
  for (const auto& s : slots_) n += static_cast<Index>(s.size());
  return n;
}

DiscreteGradient compute_gradient(const GhostedBlock& block, std::span<const Index> local_order, int threads) {
  const Grid& grid = block.local();
  DiscreteGradient gradient(grid);
  std::vector<Index> owned;
  for (Index v = 0; v < grid.simplex_count(0); ++v)
    if (block.owns_local_vertex(v)) owned.push_back(v);

  threads = std::max(1, threads);
  auto run = [&](std::size_t begin, std::size_t end) {
    auto worker = std::make_unique<LowerStarWorker>(grid, local_order, gradient);
    for (std::size_t i = begin; i < end; ++i) worker->process(owned[i]);
  };
  if (threads == 1 || owned.size() < 4096) {
    run(0, owned.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (owned.size() + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const std::size_t b = std::min(owned.size(), t * chunk);
      const std::size_t e = std::min(owned.size(), b + chunk);
      pool.emplace_back(run, b, e);
    }
    for (auto& t : pool) t.join();
  }
  return gradient;
}

CriticalSet extract_critical(const DiscreteGradient& gradient, const GhostedBlock& block,
                             std::span<const Index> local_order) {
  const Grid& grid = block.local();
  CriticalSet out;
  for (int d = 0; d <= 3; ++d) {
    auto& list = out.by_dim[d];
    for (Index i = 0; i < grid.simplex_count(d); ++i)
      if (gradient.is_critical({d, i})) list.push_back({{d, i}, simplex_key(grid, local_order, {d, i})});
    std::sort(list.begin(), list.end(), [](const auto& a, const auto& b) { return a.key < b.key; });
  }
  return out;
}

MatchingReport check_matching(const DiscreteGradient& gradient, const Grid& local) {
  MatchingReport r;
  for (int d = 0; d <= 3; ++d)
    for (Index i = 0; i < local.simplex_count(d); ++i) {
      const SimplexId s{d, i};
      if (!gradient.is_set(s)) continue;
      if (gradient.is_critical(s)) {
        ++r.critical[d];
        continue;
      }
      ++r.noncritical;
      const SimplexId p = *gradient.partner(s);
      if (!local.valid(p) || gradient.partner(p) != s) {
        r.perfect = false;
        continue;
      }
      if (gradient.state(s) == DiscreteGradient::State::PairedUp) ++r.pairs;
    }
  if (r.noncritical != 2 * r.pairs) r.perfect = false;
  return r;
}

TraceEnd trace_vpath_min(const DiscreteGradient& gradient, const Grid& local, Index vertex) {
  SimplexId v{0, vertex};
  for (Index steps = 0; steps <= local.simplex_count(1); ++steps) {
    switch (gradient.state(v)) {
      case DiscreteGradient::State::Unset: return {TraceEnd::Kind::GhostExit, v};
      case DiscreteGradient::State::Critical: return {TraceEnd::Kind::Extremum, v};
      case DiscreteGradient::State::PairedUp: {
        const SimplexId edge = *gradient.partner(v);
        const VertexList ends = local.vertices(edge);
        v = {0, ends[0] == v.index ? ends[1] : ends[0]};
        break;
      }
      case DiscreteGradient::State::PairedDown:
        throw InternalError("vertex paired downward");
    }
  }
  throw InternalError("descending v-path does not terminate");
}

TraceEnd trace_vpath_max(const DiscreteGradient& gradient, const Grid& local, SimplexId cell) {
  const int top = cell.dim;
  for (Index steps = 0; steps <= local.simplex_count(top); ++steps) {
    switch (gradient.state(cell)) {
      case DiscreteGradient::State::Unset: return {TraceEnd::Kind::GhostExit, cell};
      case DiscreteGradient::State::Critical: return {TraceEnd::Kind::Extremum, cell};
      case DiscreteGradient::State::PairedDown: {
        const SimplexId facet = *gradient.partner(cell);
        const SimplexList co = local.cofacets(facet);
        SimplexId next = cell;
        for (const SimplexId& c : co)
          if (c != cell) next = c;
        if (next == cell) return {TraceEnd::Kind::Outside, {}};
        cell = next;
        break;
      }
      case DiscreteGradient::State::PairedUp:
        throw InternalError("top cell paired upward");
    }
  }
  throw InternalError("ascending v-path does not terminate");
}

}  // namespace ddms
