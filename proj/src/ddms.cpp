#include "ddms/ddms.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <mutex>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace ddms {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

enum SetOp : Index { kContinue = 1, kEndpoint };

Message make_message(MessageKind kind, int src, int dst, std::vector<Index> payload) {
  Message m;
  m.kind = kind;
  m.src = src;
  m.dst = dst;
  m.payload = std::move(payload);
  return m;
}

Index global_top_vertex(const GhostedBlock& block, const Grid& grid, std::span<const Index> order, SimplexId local) {
  const Index v = top_vertex(block.local(), order, local);
  return grid.vertex_index(block.to_global(block.local().vertex_coords(v)));
}

}  // namespace

std::vector<TracedSaddle> distributed_sets(int rank, const Partition& partition, const DiscreteGradient& gradient,
                                           std::span<const Index> local_order, Side side,
                                           std::span<const CriticalSimplex> saddles, Transport& transport,
                                           SetTracingStats* stats) {
  SetTracingStats local_stats;
  SetTracingStats& st = stats ? *stats : local_stats;
  const Grid& grid = partition.grid();
  const GhostedBlock& block = partition.block(rank);
  const Grid& local = block.local();

  std::vector<TracedSaddle> out(saddles.size());
  std::unordered_map<Index, std::size_t> slot;
  std::vector<Message> outbox;
  Index round = 0;
  Index last_traced = -1;

  auto deliver = [&](int origin, Index saddle, Index which, const Endpoint& e) {
    if (origin == rank) {
      out[slot.at(saddle)].ends[which] = e;
      return;
    }
    std::vector<Index> p = {kEndpoint, saddle, which, e.extremum};
    p.insert(p.end(), e.age.begin(), e.age.end());
    p.insert(p.end(), {e.home, e.top_vertex});
    outbox.push_back(make_message(MessageKind::SetContinuation, rank, origin, std::move(p)));
  };

  auto trace = [&](SimplexId start, int origin, Index saddle, Index which) {
    last_traced = round;
    const TraceEnd end =
        side == Side::Min ? trace_vpath_min(gradient, local, start.index) : trace_vpath_max(gradient, local, start);
    switch (end.kind) {
      case TraceEnd::Kind::Extremum: {
        const SimplexKey key = simplex_key(local, local_order, end.simplex);
        Endpoint e;
        e.extremum = block.to_global(grid, end.simplex).index;
        e.age = side == Side::Min ? min_side_age(key) : max_side_age(key);
        e.home = rank;
        e.top_vertex = global_top_vertex(block, grid, local_order, end.simplex);
        deliver(origin, saddle, which, e);
        return;
      }
      case TraceEnd::Kind::Outside: {
        Endpoint e;
        e.age = kOutsideAge;
        deliver(origin, saddle, which, e);
        return;
      }
      case TraceEnd::Kind::GhostExit: {
        const int owner = simplex_owner(partition, block, local_order, end.simplex);
        const SimplexId g = block.to_global(grid, end.simplex);
        outbox.push_back(make_message(MessageKind::SetContinuation, rank, owner,
                                      {kContinue, origin, saddle, which, g.dim, g.index}));
        ++st.continuations;
        return;
      }
    }
  };

  for (std::size_t i = 0; i < saddles.size(); ++i) {
    const CriticalSimplex& c = saddles[i];
    TracedSaddle& t = out[i];
    t.id = block.to_global(grid, c.local).index;
    t.key = c.key;
    t.top_vertex = global_top_vertex(block, grid, local_order, c.local);
    slot.emplace(t.id, i);
  }
  for (std::size_t i = 0; i < saddles.size(); ++i) {
    const CriticalSimplex& c = saddles[i];
    const Index id = out[i].id;
    if (side == Side::Min) {
      const VertexList v = local.vertices(c.local);
      trace({0, v[0]}, rank, id, 0);
      trace({0, v[1]}, rank, id, 1);
    } else {
      const SimplexList co = local.cofacets(c.local);
      trace(co[0], rank, id, 0);
      if (co.size() > 1)
        trace(co[1], rank, id, 1);
      else
        out[i].ends[1] = Endpoint{kOutsideNode, kOutsideAge, -1, -1};
    }
  }

  for (;;) {
    auto delivery = transport.round_exchange(rank, std::move(outbox));
    outbox.clear();
    if (delivery.quiescent) break;
    ++round;
    ++st.rounds;
    for (const Message& m : delivery.messages) {
      const auto& p = m.payload;
      if (p[0] == kContinue) {
        const auto start = block.to_local(grid, {static_cast<int>(p[4]), p[5]});
        if (!start) throw InternalError("set continuation outside the ghosted block");
        trace(*start, static_cast<int>(p[1]), p[2], p[3]);
      } else {
        Endpoint e{p[3], {p[4], p[5], p[6], p[7]}, static_cast<int>(p[8]), p[9]};
        out[slot.at(p[1])].ends[p[2]] = e;
      }
    }
  }
  st.compute_rounds = transport.allreduce_max(rank, last_traced) + 1;
  for (const TracedSaddle& t : out)
    for (const Endpoint& e : t.ends)
      if (e.extremum != kOutsideNode && e.home < 0) throw InternalError("unresolved v-path endpoint");
  return out;
}

int extremum_owner(int home, std::span<const int> incident) {
  if (incident.empty()) return home;
  if (std::binary_search(incident.begin(), incident.end(), home)) return home;
  return incident.front();
}

LocalGraph build_dist_graph(int rank, std::span<const TracedSaddle> saddles, Side side, Transport& transport) {
  LocalGraph g;
  // Incident extrema of this rank and what is known about them.
  std::map<Index, Endpoint> known;
  for (const TracedSaddle& s : saddles) {
    if (s.ends[0].extremum == s.ends[1].extremum) continue;
    g.saddles.push_back({s.id, side == Side::Min ? min_side_age(s.key) : max_side_age(s.key), s.ends[0].extremum,
                         s.ends[1].extremum});
    for (const Endpoint& e : s.ends)
      if (e.extremum != kOutsideNode) known.emplace(e.extremum, e);
  }

  // Round 1: incidences to homes.
  std::vector<Message> outbox;
  std::map<Index, std::vector<int>> incident;  // on the home
  for (const auto& [id, e] : known) {
    if (e.home == rank)
      incident[id].push_back(rank);
    else
      outbox.push_back(make_message(MessageKind::GraphTriplet, rank, e.home, {id}));
  }
  auto delivery = transport.round_exchange(rank, std::move(outbox));
  for (const Message& m : delivery.messages) incident[m.payload[0]].push_back(m.src);

  // Round 2: owner and ghost list back to every incident rank.
  outbox.clear();
  std::map<Index, std::pair<int, std::vector<int>>> assigned;
  for (auto& [id, ranks] : incident) {
    std::sort(ranks.begin(), ranks.end());
    const int owner = extremum_owner(rank, ranks);
    std::vector<int> ghosts;
    for (int r : ranks)
      if (r != owner) ghosts.push_back(r);
    for (int r : ranks) {
      if (r == rank) {
        assigned[id] = {owner, ghosts};
        continue;
      }
      std::vector<Index> p = {id, owner};
      p.insert(p.end(), ghosts.begin(), ghosts.end());
      outbox.push_back(make_message(MessageKind::GraphTriplet, rank, r, std::move(p)));
    }
  }
  delivery = transport.round_exchange(rank, std::move(outbox));
  for (const Message& m : delivery.messages)
    assigned[m.payload[0]] = {static_cast<int>(m.payload[1]),
                              std::vector<int>(m.payload.begin() + 2, m.payload.end())};

  for (const auto& [id, e] : known) {
    const auto& [owner, ghosts] = assigned.at(id);
    GraphNode n{id, e.age, owner, {}};
    if (owner == rank) n.ghost_ranks = ghosts;
    g.nodes.push_back(std::move(n));
  }
  return g;
}

namespace {

class GridSaddleComplex : public SaddleComplex {
 public:
  GridSaddleComplex(const Partition& partition, const GhostedBlock& block, std::span<const Index> order,
                    const DiscreteGradient& gradient, std::unordered_set<Index> critical_edges)
      : partition_(partition),
        block_(block),
        order_(order),
        gradient_(gradient),
        critical_edges_(std::move(critical_edges)) {}

  EdgeKind edge_kind(Index edge) const override {
    const SimplexId e = local({1, edge});
    switch (gradient_.state(e)) {
      case DiscreteGradient::State::PairedUp: return EdgeKind::Expandable;
      case DiscreteGradient::State::Critical:
        return critical_edges_.count(edge) ? EdgeKind::Critical : EdgeKind::Negative;
      default: return EdgeKind::Negative;
    }
  }

  void expansion(Index edge, std::vector<EdgeRef>& out) const override {
    facets(*gradient_.partner(local({1, edge})), out);
  }

  void boundary(Index triangle, std::vector<EdgeRef>& out) const override { facets(local({2, triangle}), out); }

 private:
  SimplexId local(SimplexId global) const {
    const auto l = block_.to_local(partition_.grid(), global);
    if (!l) throw InternalError("simplex " + to_string(global) + " outside the ghosted block");
    return *l;
  }

  void facets(SimplexId tri, std::vector<EdgeRef>& out) const {
    for (const SimplexId& e : block_.local().faces(tri))
      out.push_back({block_.to_global(partition_.grid(), e).index, simplex_key(block_.local(), order_, e),
                     simplex_owner(partition_, block_, order_, e)});
  }

  const Partition& partition_;
  const GhostedBlock& block_;
  std::span<const Index> order_;
  const DiscreteGradient& gradient_;
  std::unordered_set<Index> critical_edges_;
};

struct RankOutput {
  Diagram diagram;
  StepTimes seconds;
  std::array<Index, 4> critical{};
  Index gradient_pairs = 0;
  Index noncritical = 0;
  bool matching_perfect = true;
  Index trace_rounds = 0;
  Index pairing_rounds = 0;
  Index recomputes = 0;
  SaddlePairingStats d1;
  Index resident = 0;
};

struct SideOutcome {
  std::unordered_set<Index> saddles_paired;  // owned saddles
  std::unordered_set<Index> extrema_dead;    // extrema homed here
};

enum NoticeOp : Index { kPaired = 1, kDead };

// D0 (min side) or the top-dimensional pairs (max side) of one rank.
SideOutcome pair_side(int rank, const Partition& partition, const DiscreteGradient& gradient,
                      std::span<const Index> order, const CriticalSet& critical, Side side,
                      const std::unordered_set<Index>& skip, Transport& transport, RankOutput& out) {
  const Grid& grid = partition.grid();
  const GhostedBlock& block = partition.block(rank);
  const int top = grid.dimension();
  const int saddle_dim = side == Side::Min ? 1 : top - 1;

  std::vector<CriticalSimplex> saddles;
  for (const CriticalSimplex& c : critical.by_dim[saddle_dim])
    if (!skip.count(block.to_global(grid, c.local).index)) saddles.push_back(c);

  SetTracingStats trace_stats;
  const std::vector<TracedSaddle> traced =
      distributed_sets(rank, partition, gradient, order, side, saddles, transport, &trace_stats);
  out.trace_rounds = std::max(out.trace_rounds, trace_stats.compute_rounds);
  const LocalGraph graph = build_dist_graph(rank, traced, side, transport);
  ExtremumPairingStats pairing_stats;
  const DistributedPairs pairs = self_correcting_pairing(rank, graph, transport, {}, &pairing_stats);
  out.pairing_rounds += pairing_stats.rounds;
  out.recomputes += pairing_stats.recomputes;

  std::unordered_map<Index, const Endpoint*> endpoint;
  std::unordered_map<Index, const TracedSaddle*> saddle_of;
  for (const TracedSaddle& t : traced) {
    saddle_of.emplace(t.id, &t);
    for (const Endpoint& e : t.ends)
      if (e.extremum != kOutsideNode) endpoint.emplace(e.extremum, &e);
  }

  SideOutcome result;
  std::vector<Message> outbox;
  auto handle = [&](const std::vector<Index>& p) {
    if (p[0] == kDead) {
      result.extrema_dead.insert(p[1]);
      return;
    }
    const TracedSaddle& s = *saddle_of.at(p[1]);
    result.saddles_paired.insert(s.id);
    PersistencePair pp;
    if (side == Side::Min) {
      pp.dim = 0;
      pp.birth = {0, p[2]};
      pp.death = {1, s.id};
      pp.birth_order = p[3];
      pp.birth_vertex = p[4];
      pp.death_order = s.key[0];
      pp.death_vertex = s.top_vertex;
    } else {
      pp.dim = top - 1;
      pp.birth = {top - 1, s.id};
      pp.death = {top, p[2]};
      pp.birth_order = s.key[0];
      pp.birth_vertex = s.top_vertex;
      pp.death_order = p[3];
      pp.death_vertex = p[4];
    }
    out.diagram.pairs.push_back(pp);
  };
  auto notify = [&](int dst, std::vector<Index> p) {
    if (dst == rank)
      handle(p);
    else
      outbox.push_back(make_message(MessageKind::GraphTriplet, rank, dst, std::move(p)));
  };
  for (const ExtremumPair& pr : pairs.pairs) {
    const Endpoint& e = *endpoint.at(pr.extremum);
    const Index ext_order = side == Side::Min ? e.age[0] : -e.age[0];
    notify(pr.saddle_owner, {kPaired, pr.saddle, pr.extremum, ext_order, e.top_vertex});
    notify(e.home, {kDead, pr.extremum});
  }
  const auto delivery = transport.round_exchange(rank, std::move(outbox));
  for (const Message& m : delivery.messages) handle(m.payload);

  const int ext_dim = side == Side::Min ? 0 : top;
  for (const CriticalSimplex& c : critical.by_dim[ext_dim]) {
    const Index id = block.to_global(grid, c.local).index;
    if (result.extrema_dead.count(id)) continue;
    out.diagram.infinite.push_back(
        {ext_dim, {ext_dim, id}, c.key[0], 0, global_top_vertex(block, grid, order, c.local)});
  }
  return result;
}

void run_rank(int rank, const Partition& partition, std::span<const double> scalars, const DistributedConfig& config,
              Transport& transport, RankOutput& out) {
  const Grid& grid = partition.grid();
  const GhostedBlock& block = partition.block(rank);
  const Grid& local = block.local();
  const int top = grid.dimension();

  auto t = Clock::now();
  std::vector<double> local_scalars(static_cast<std::size_t>(local.simplex_count(0)));
  for (Index v = 0; v < local.simplex_count(0); ++v)
    local_scalars[v] = scalars[grid.vertex_index(block.to_global(local.vertex_coords(v)))];
  const GlobalOrder order = order_distributed(rank, partition, local_scalars, transport);
  out.seconds.order = seconds_since(t);

  t = Clock::now();
  const DiscreteGradient gradient = compute_gradient(block, order, 1);
  out.seconds.gradient = seconds_since(t);

  t = Clock::now();
  const CriticalSet critical = extract_critical(gradient, block, order);
  const MatchingReport matching = check_matching(gradient, local);
  out.seconds.extract = seconds_since(t);
  out.critical = matching.critical;
  out.gradient_pairs = matching.pairs;
  out.noncritical = matching.noncritical;
  out.matching_perfect = matching.perfect;

  auto global_id = [&](const CriticalSimplex& c) { return block.to_global(grid, c.local).index; };
  auto infinite = [&](int dim, const CriticalSimplex& c) {
    out.diagram.infinite.push_back(
        {dim, {dim, global_id(c)}, c.key[0], 0, global_top_vertex(block, grid, order, c.local)});
  };

  t = Clock::now();
  SideOutcome d0;
  if (top >= 1) {
    d0 = pair_side(rank, partition, gradient, order, critical, Side::Min, {}, transport, out);
  } else {
    for (const CriticalSimplex& c : critical.by_dim[0]) infinite(0, c);
  }
  out.seconds.d0 = seconds_since(t);

  if (top == 1) {
    for (const CriticalSimplex& c : critical.by_dim[1])
      if (!d0.saddles_paired.count(global_id(c))) infinite(1, c);
  }
  if (top >= 2) {
    t = Clock::now();
    const std::unordered_set<Index> none;
    const SideOutcome d2 = pair_side(rank, partition, gradient, order, critical, Side::Max,
                                     top == 2 ? d0.saddles_paired : none, transport, out);
    out.seconds.d2 = seconds_since(t);

    if (top == 2) {
      for (const CriticalSimplex& c : critical.by_dim[1]) {
        const Index id = global_id(c);
        if (!d0.saddles_paired.count(id) && !d2.saddles_paired.count(id)) infinite(1, c);
      }
    } else {
      t = Clock::now();
      std::unordered_set<Index> edges;
      for (const CriticalSimplex& c : critical.by_dim[1]) {
        const Index id = global_id(c);
        if (!d0.saddles_paired.count(id)) edges.insert(id);
      }
      std::vector<CriticalTriangle> triangles;
      for (const CriticalSimplex& c : critical.by_dim[2]) {
        const Index id = global_id(c);
        if (!d2.saddles_paired.count(id))
          triangles.push_back({id, c.key, global_top_vertex(block, grid, order, c.local)});
      }
      SaddlePairingConfig sp;
      sp.mode = config.mode;
      sp.workers = config.workers;
      sp.send_threshold = config.send_threshold;
      sp.threshold_fraction = config.threshold_fraction;
      if (config.anticipation)
        sp.anticipation = config.anticipation_budget > 0
                              ? config.anticipation_budget
                              : std::max<Index>(1, static_cast<Index>(config.anticipation_fraction *
                                                                      static_cast<double>(local.simplex_count(2))));
      const GridSaddleComplex complex(partition, block, order, gradient, edges);
      const SaddlePairs d1 = distributed_pair_critical_simplices(rank, complex, triangles, transport, sp, &out.d1);
      std::unordered_set<Index> paired_edges;
      for (const SaddlePair& p : d1.pairs) {
        paired_edges.insert(p.edge);
        const auto l = block.to_local(grid, {1, p.edge});
        PersistencePair pp;
        pp.dim = 1;
        pp.birth = {1, p.edge};
        pp.death = {2, p.triangle.id};
        pp.birth_order = simplex_key(local, order, *l)[0];
        pp.birth_vertex = global_top_vertex(block, grid, order, *l);
        pp.death_order = p.triangle.key[0];
        pp.death_vertex = p.triangle.top_vertex;
        out.diagram.pairs.push_back(pp);
      }
      for (const CriticalSimplex& c : critical.by_dim[1]) {
        const Index id = global_id(c);
        if (edges.count(id) && !paired_edges.count(id)) infinite(1, c);
      }
      for (const CriticalTriangle& c : d1.exhausted)
        out.diagram.infinite.push_back({2, {2, c.id}, c.key[0], 0, c.top_vertex});
      out.seconds.d1 = seconds_since(t);
    }
  }
  out.resident = gradient.resident_slots() + static_cast<Index>(order.size()) + out.d1.peak_boundary_entries;
}

}  // namespace

Diagram compute_diagram_distributed(const Grid& grid, std::span<const double> scalars, const DistributedConfig& config,
                                    DistributedStats* stats) {
  if (static_cast<Index>(scalars.size()) != grid.simplex_count(0))
    throw std::invalid_argument("scalar field size does not match the grid");
  const Partition partition(grid, config.layout);
  const int ranks = partition.ranks();
  Transport transport(ranks, {config.seed});
  std::vector<RankOutput> outputs(ranks);
  run_ranks(transport, [&](int rank) { run_rank(rank, partition, scalars, config, transport, outputs[rank]); });

  Diagram d;
  DistributedStats local_stats;
  DistributedStats& st = stats ? *stats : local_stats;
  st = DistributedStats{};
  for (const RankOutput& o : outputs) {
    d.pairs.insert(d.pairs.end(), o.diagram.pairs.begin(), o.diagram.pairs.end());
    d.infinite.insert(d.infinite.end(), o.diagram.infinite.begin(), o.diagram.infinite.end());
    st.seconds.order = std::max(st.seconds.order, o.seconds.order);
    st.seconds.gradient = std::max(st.seconds.gradient, o.seconds.gradient);
    st.seconds.extract = std::max(st.seconds.extract, o.seconds.extract);
    st.seconds.d0 = std::max(st.seconds.d0, o.seconds.d0);
    st.seconds.d2 = std::max(st.seconds.d2, o.seconds.d2);
    st.seconds.d1 = std::max(st.seconds.d1, o.seconds.d1);
    for (int k = 0; k < 4; ++k) st.critical[k] += o.critical[k];
    st.gradient_pairs += o.gradient_pairs;
    st.noncritical += o.noncritical;
    st.matching_perfect = st.matching_perfect && o.matching_perfect;
    st.trace_rounds = std::max(st.trace_rounds, o.trace_rounds);
    st.pairing_rounds = std::max(st.pairing_rounds, o.pairing_rounds);
    st.recomputes += o.recomputes;
    st.d1_rounds = std::max(st.d1_rounds, o.d1.rounds);
    st.tokens += o.d1.tokens_sent;
    st.boundary_updates += o.d1.updates_sent;
    st.propagation.expansions += o.d1.expansions;
    st.propagation.merges += o.d1.merges;
    st.propagation.evictions += o.d1.evictions;
    st.propagation.peak_boundary_entries = std::max(st.propagation.peak_boundary_entries, o.d1.peak_boundary_entries);
    st.resident_state.push_back(o.resident);
  }
  st.transport = transport.stats();
  fill_values(d, scalars);
  d.canonicalize();
  return d;
}

}  // namespace ddms
