#include "ddms/dms.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <random>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "ddms/partition.hpp"

namespace ddms {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

ExtremumGraph build_extremum_graph(const Grid& grid, const DiscreteGradient& gradient, const CriticalSet& critical,
                                   std::span<const Index> order, Side side, std::span<const SimplexId> skip) {
  ExtremumGraph g;
  g.side = side;
  const int top = grid.dimension();
  const int saddle_dim = side == Side::Min ? 1 : top - 1;
  std::unordered_map<Index, Index> node_of;
  if (side == Side::Max) {
    g.extrema.push_back({top, -1});
    g.extremum_age.push_back(kOutsideAge);
  }
  auto node = [&](SimplexId e) {
    auto [it, fresh] = node_of.try_emplace(e.index, static_cast<Index>(g.extrema.size()));
    if (fresh) {
      const SimplexKey key = simplex_key(grid, order, e);
      g.extrema.push_back(e);
      g.extremum_age.push_back(side == Side::Min ? min_side_age(key) : max_side_age(key));
    }
    return it->second;
  };
  auto resolve = [&](const TraceEnd& end) -> Index {
    switch (end.kind) {
      case TraceEnd::Kind::Extremum: return node(end.simplex);
      case TraceEnd::Kind::Outside: return 0;
      case TraceEnd::Kind::GhostExit: break;
    }
    throw InternalError("v-path left a single-block grid");
  };

  if (top < 1 || (side == Side::Max && top < 2)) return g;
  std::unordered_set<Index> skipped;
  for (const SimplexId& s : skip)
    if (s.dim == saddle_dim) skipped.insert(s.index);

  const auto& saddles = critical.by_dim[saddle_dim];
  const std::size_t n = saddles.size();
  for (std::size_t k = 0; k < n; ++k) {
    // Max-side saddles are swept in descending key order.
    const CriticalSimplex& c = side == Side::Min ? saddles[k] : saddles[n - 1 - k];
    if (skipped.count(c.local.index)) continue;
    Index ends[2];
    if (side == Side::Min) {
      const VertexList v = grid.vertices(c.local);
      ends[0] = resolve(trace_vpath_min(gradient, grid, v[0]));
      ends[1] = resolve(trace_vpath_min(gradient, grid, v[1]));
    } else {
      const SimplexList co = grid.cofacets(c.local);
      ends[0] = resolve(trace_vpath_max(gradient, grid, co[0]));
      ends[1] = co.size() > 1 ? resolve(trace_vpath_max(gradient, grid, co[1])) : 0;
    }
    if (ends[0] == ends[1]) continue;
    const Index s = static_cast<Index>(g.saddles.size());
    g.saddles.push_back(c.local);
    g.saddle_age.push_back(side == Side::Min ? min_side_age(c.key) : max_side_age(c.key));
    g.triplets.push_back({s, ends[0], ends[1]});
  }
  return g;
}

ExtremumPairing pair_extrema_saddles(std::span<const Triplet> triplets, std::span<const Age> extremum_age) {
  ExtremumPairing out;
  const std::size_t n = extremum_age.size();
  out.representative.resize(n);
  std::iota(out.representative.begin(), out.representative.end(), Index{0});
  out.extremum_pair.assign(n, -1);
  auto& rep = out.representative;
  auto find = [&](Index v) {
    Index root = v;
    while (rep[root] != root) root = rep[root];
    while (rep[v] != root) {
      const Index next = rep[v];
      rep[v] = root;
      v = next;
    }
    return root;
  };
  for (const Triplet& t : triplets) {
    Index r0 = find(t.t0);
    Index r1 = find(t.t1);
    if (r0 == r1) continue;
    if (extremum_age[r0] < extremum_age[r1]) std::swap(r0, r1);
    out.pairs.emplace_back(t.saddle, r0);
    out.extremum_pair[r0] = t.saddle;
    rep[r0] = r1;
    rep[t.t0] = r1;  // collapse the arc
  }
  return out;
}

namespace {

struct EdgeEntry {
  SimplexKey key;
  Index edge;

  bool operator<(const EdgeEntry& o) const { return key < o.key; }
};

using Boundary = std::set<EdgeEntry>;

void toggle(Boundary& b, const EdgeEntry& e) {
  auto [it, inserted] = b.insert(e);
  if (!inserted) b.erase(it);
}

}  // namespace

std::vector<std::pair<SimplexId, SimplexId>> pair_critical_simplices(const Grid& grid,
                                                                     const DiscreteGradient& gradient,
                                                                     std::span<const Index> order,
                                                                     const SaddleSaddleInput& input,
                                                                     const PropagationOptions& options,
                                                                     PropagationStats* stats) {
  PropagationStats local_stats;
  PropagationStats& st = stats ? *stats : local_stats;

  const std::size_t n = input.triangles.size();
  std::vector<SimplexKey> tri_key(n);
  for (std::size_t i = 0; i < n; ++i) tri_key[i] = simplex_key(grid, order, input.triangles[i]);

  // Pair slot of each unpaired critical edge: index of the claiming triangle or -1.
  std::unordered_map<Index, Index> claim;
  claim.reserve(input.edges.size() * 2);
  for (const SimplexId& e : input.edges) claim.emplace(e.index, -1);

  std::vector<Boundary> boundary(n);
  std::vector<char> started(n, 0);
  Index live_entries = 0;

  auto add_facets = [&](Boundary& b, SimplexId tri) {
    for (const SimplexId& e : grid.faces(tri)) toggle(b, {simplex_key(grid, order, e), e.index});
  };

  std::vector<Index> sequence(n);
  std::iota(sequence.begin(), sequence.end(), Index{0});
  std::sort(sequence.begin(), sequence.end(), [&](Index a, Index b) { return tri_key[a] < tri_key[b]; });
  if (options.randomized) {
    std::mt19937_64 rng(options.seed);
    std::shuffle(sequence.begin(), sequence.end(), rng);
  }

  std::vector<Index> pending;
  for (Index first : sequence) {
    pending.push_back(first);
    while (!pending.empty()) {
      const Index s = pending.back();
      pending.pop_back();
      Boundary& b = boundary[s];
      live_entries -= static_cast<Index>(b.size());
      if (!started[s]) {
        started[s] = 1;
        add_facets(b, input.triangles[s]);
      }
      while (!b.empty()) {
        const EdgeEntry top = *b.rbegin();
        const SimplexId tau{1, top.edge};
        const auto state = gradient.state(tau);
        if (state == DiscreteGradient::State::PairedUp) {
          add_facets(b, *gradient.partner(tau));
          ++st.expansions;
          st.peak_boundary_entries = std::max(st.peak_boundary_entries, live_entries + static_cast<Index>(b.size()));
          continue;
        }
        auto slot = claim.find(top.edge);
        if (state != DiscreteGradient::State::Critical || slot == claim.end())
          throw InternalError("propagation reached a negative edge " + to_string(tau));
        if (slot->second < 0) {
          slot->second = s;
          break;
        }
        const Index other = slot->second;
        if (tri_key[other] < tri_key[s]) {
          for (const EdgeEntry& e : boundary[other]) toggle(b, e);
          ++st.merges;
        } else {
          slot->second = s;
          pending.push_back(other);
          ++st.evictions;
          break;
        }
      }
      live_entries += static_cast<Index>(b.size());
      st.peak_boundary_entries = std::max(st.peak_boundary_entries, live_entries);
    }
  }

  std::vector<std::pair<SimplexId, SimplexId>> out;
  for (const auto& [edge, s] : claim)
    if (s >= 0) out.emplace_back(SimplexId{1, edge}, input.triangles[s]);
  std::sort(out.begin(), out.end());
  return out;
}

Diagram compute_diagram_single(const Grid& grid, std::span<const double> scalars, const SingleOptions& options,
                               RunStats* stats) {
  if (static_cast<Index>(scalars.size()) != grid.simplex_count(0))
    throw std::invalid_argument("scalar field size does not match the grid");
  RunStats local_stats;
  RunStats& st = stats ? *stats : local_stats;
  Diagram out;

  auto t = Clock::now();
  const GlobalOrder order = order_sequential(scalars);
  st.seconds.order = seconds_since(t);

  t = Clock::now();
  const Partition partition(grid, Layout{});
  const GhostedBlock& block = partition.block(0);
  const DiscreteGradient gradient = compute_gradient(block, order, options.threads);
  st.seconds.gradient = seconds_since(t);

  t = Clock::now();
  const CriticalSet critical = extract_critical(gradient, block, order);
  const MatchingReport matching = check_matching(gradient, grid);
  st.seconds.extract = seconds_since(t);
  st.critical = matching.critical;
  st.gradient_pairs = matching.pairs;
  st.noncritical = matching.noncritical;
  st.matching_perfect = matching.perfect;

  const int top = grid.dimension();

  // D0.
  t = Clock::now();
  std::vector<SimplexId> negative_edges;
  {
    const ExtremumGraph g = build_extremum_graph(grid, gradient, critical, order, Side::Min);
    const ExtremumPairing p = pair_extrema_saddles(g.triplets, g.extremum_age);
    for (const auto& [saddle, ext] : p.pairs) {
      out.pairs.push_back(make_pair(grid, order, scalars, 0, g.extrema[ext], g.saddles[saddle]));
      negative_edges.push_back(g.saddles[saddle]);
    }
    std::unordered_set<Index> dead;
    for (const auto& pr : p.pairs) dead.insert(g.extrema[pr.second].index);
    for (const auto& c : critical.by_dim[0])
      if (!dead.count(c.local.index)) out.infinite.push_back(make_infinite(grid, order, scalars, 0, c.local));
  }
  st.seconds.d0 = seconds_since(t);

  std::unordered_set<Index> edge_done;
  for (const auto& e : negative_edges) edge_done.insert(e.index);

  if (top >= 2) {
    // Top-dimensional pairs through the dual graph; in 2D this is D1.
    t = Clock::now();
    const std::span<const SimplexId> skip = top == 2 ? std::span<const SimplexId>(negative_edges) : std::span<const SimplexId>();
    const ExtremumGraph g = build_extremum_graph(grid, gradient, critical, order, Side::Max, skip);
    const ExtremumPairing p = pair_extrema_saddles(g.triplets, g.extremum_age);
    std::unordered_set<Index> saddle_done, top_done;
    for (const auto& [saddle, ext] : p.pairs) {
      out.pairs.push_back(make_pair(grid, order, scalars, top - 1, g.saddles[saddle], g.extrema[ext]));
      saddle_done.insert(g.saddles[saddle].index);
      top_done.insert(g.extrema[ext].index);
    }
    for (const auto& c : critical.by_dim[top])
      if (!top_done.count(c.local.index)) out.infinite.push_back(make_infinite(grid, order, scalars, top, c.local));
    st.seconds.d2 = seconds_since(t);

    if (top == 2) {
      for (const auto& c : critical.by_dim[1])
        if (!edge_done.count(c.local.index) && !saddle_done.count(c.local.index))
          out.infinite.push_back(make_infinite(grid, order, scalars, 1, c.local));
    } else {
      t = Clock::now();
      SaddleSaddleInput input;
      for (const auto& c : critical.by_dim[2])
        if (!saddle_done.count(c.local.index)) input.triangles.push_back(c.local);
      for (const auto& c : critical.by_dim[1])
        if (!edge_done.count(c.local.index)) input.edges.push_back(c.local);
      const auto d1 = pair_critical_simplices(grid, gradient, order, input, options.propagation, &st.propagation);
      std::unordered_set<Index> tri_paired;
      for (const auto& [edge, tri] : d1) {
        out.pairs.push_back(make_pair(grid, order, scalars, 1, edge, tri));
        edge_done.insert(edge.index);
        tri_paired.insert(tri.index);
      }
      for (const auto& e : input.edges)
        if (!edge_done.count(e.index)) out.infinite.push_back(make_infinite(grid, order, scalars, 1, e));
      for (const auto& tri : input.triangles)
        if (!tri_paired.count(tri.index)) out.infinite.push_back(make_infinite(grid, order, scalars, 2, tri));
      st.seconds.d1 = seconds_since(t);
    }
  } else if (top == 1) {
    for (const auto& c : critical.by_dim[1])
      if (!edge_done.count(c.local.index)) out.infinite.push_back(make_infinite(grid, order, scalars, 1, c.local));
  }

  st.resident_state = {gradient.resident_slots() + static_cast<Index>(order.size()) +
                       st.propagation.peak_boundary_entries};
  out.canonicalize();
  return out;
}

}  // namespace ddms
