#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "ddms/diagram.hpp"
#include "ddms/dms.hpp"
#include "ddms/extremum_pairing.hpp"
#include "ddms/gradient.hpp"
#include "ddms/partition.hpp"
#include "ddms/saddle_pairing.hpp"
#include "ddms/transport.hpp"

namespace ddms {

/// Where one v-path of a saddle ends.
struct Endpoint {
  Index extremum = kOutsideNode;  ///< global id of the extremum simplex
  Age age{};
  int home = -1;          ///< rank whose block owns the extremum simplex
  Index top_vertex = -1;  ///< global id of its highest vertex
};

struct TracedSaddle {
  Index id = 0;  ///< global id
  SimplexKey key{};
  Index top_vertex = 0;
  std::array<Endpoint, 2> ends;
};

struct SetTracingStats {
  Index rounds = 0;          ///< exchanges that delivered something
  Index compute_rounds = 0;  ///< rounds in which some rank advanced a trace
  Index continuations = 0;   ///< continuations sent by this rank
};

/// Traces both v-paths of this rank's saddles, handing traces over to the
/// owner of each ghost simplex reached until no rank sends anything.
/// Min side: saddles are critical edges. Max side: critical cells of
/// dimension top-1, traced through the top cells. Collective.
std::vector<TracedSaddle> distributed_sets(int rank, const Partition& partition, const DiscreteGradient& gradient,
                                           std::span<const Index> local_order, Side side,
                                           std::span<const CriticalSimplex> saddles, Transport& transport,
                                           SetTracingStats* stats = nullptr);

/// Owner of an extremum node: its home rank if that rank holds an incident
/// saddle, otherwise the lowest rank holding one. incident is ascending.
int extremum_owner(int home, std::span<const int> incident);

/// Ghosted extremum graph of this rank from its traced saddles: the home of
/// every extremum collects the incident ranks, assigns ownership and returns
/// owner and ghost list to them. Saddles whose endpoints coincide are dropped.
/// Collective.
LocalGraph build_dist_graph(int rank, std::span<const TracedSaddle> saddles, Side side, Transport& transport);

struct DistributedConfig {
  Layout layout;
  TransportMode mode = TransportMode::Round;
  std::uint64_t seed = 0;
  /// Propagation workers per rank in eager mode.
  int workers = 1;
  bool anticipation = true;
  /// Anticipation steps per token visit as a fraction of the block's triangles.
  double anticipation_fraction = 1e-4;
  /// Fixed budget overriding the fraction when positive.
  Index anticipation_budget = 0;
  double threshold_fraction = 1e-4;
  /// Fixed eager send threshold overriding the fraction when positive.
  Index send_threshold = 0;
};

struct DistributedStats {
  /// Per step, the slowest rank.
  StepTimes seconds;
  std::array<Index, 4> critical{};
  Index gradient_pairs = 0;
  Index noncritical = 0;
  bool matching_perfect = true;
  Index trace_rounds = 0;
  Index pairing_rounds = 0;  ///< D0 and D2 self-correcting rounds, summed
  Index recomputes = 0;
  Index d1_rounds = 0;       ///< max over ranks; eager mode counts sends
  Index tokens = 0;
  Index boundary_updates = 0;
  PropagationStats propagation;
  TransportStats transport;
  /// Per-rank peak of gradient slots + order entries + boundary entries.
  std::vector<Index> resident_state;
};

/// Full pipeline over config.layout.ranks() logical processes. The gathered
/// diagram is canonical and takes its values from scalars.
Diagram compute_diagram_distributed(const Grid& grid, std::span<const double> scalars, const DistributedConfig& config,
                                    DistributedStats* stats = nullptr);

}  // namespace ddms
