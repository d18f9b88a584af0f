#pragma once

#include <vector>

#include "ddms/dms.hpp"
#include "ddms/transport.hpp"

namespace ddms {

/// Id of the virtual outside node of max-side graphs; present on every rank.
inline constexpr Index kOutsideNode = -1;

/// Extremum node as known to one rank.
struct GraphNode {
  Index id = 0;  ///< global extremum id
  Age age{};
  int owner = 0;
  /// Filled on the owner: ranks holding a ghost copy, ascending.
  std::vector<int> ghost_ranks;
};

/// A saddle owned by this rank with its two (distinct) v-path endpoints.
struct GraphSaddle {
  Index id = 0;
  Age age{};
  Index t0 = 0;
  Index t1 = 0;
};

/// The ghosted extremum graph of one rank: owned and ghost nodes, owned saddles.
struct LocalGraph {
  std::vector<GraphNode> nodes;
  std::vector<GraphSaddle> saddles;
};

struct ClaimEvent {
  int rank = 0;
  Index saddle = 0;
  Index extremum = 0;
};

struct ExtremumPairingStats {
  Index rounds = 0;
  Index evaluations = 0;
  Index recomputes = 0;
  Index displacements = 0;
  /// Pairings proposed by saddle owners, in issue order per rank.
  std::vector<ClaimEvent> claims;
};

struct ExtremumPair {
  Index saddle = 0;
  int saddle_owner = 0;
  Index extremum = 0;

  auto operator<=>(const ExtremumPair&) const = default;
};

struct DistributedPairs {
  /// Pairs of owned extrema.
  std::vector<ExtremumPair> pairs;
  /// Owned extrema left unpaired.
  std::vector<Index> unpaired;
};

struct ExtremumPairingConfig {
  /// Hard failure above this many rounds; 0 derives a bound from the saddle count.
  Index max_rounds = 0;
};

/// Self-correcting distributed union-find pairing. Collective: every rank
/// calls it with its own graph. Representative tags carry the saddle that
/// assigned them; walks follow only tags assigned by older saddles and never
/// compress. Conflicting pairings are settled by the extremum's owner in
/// favour of the elder saddle, and the loser recomputes. Quiescence of a
/// round ends the protocol.
DistributedPairs self_correcting_pairing(int rank, const LocalGraph& graph, Transport& transport,
                                         const ExtremumPairingConfig& config = {},
                                         ExtremumPairingStats* stats = nullptr);

}  // namespace ddms
