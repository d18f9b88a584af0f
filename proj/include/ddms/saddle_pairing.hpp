#pragma once

#include <cstdint>
#include <vector>

#include "ddms/dms.hpp"
#include "ddms/transport.hpp"

namespace ddms {

/// An edge as seen from one rank: global id, filtration key and owner.
struct EdgeRef {
  Index id = 0;
  SimplexKey key{};
  int owner = 0;
};

/// One rank's read-only view of the complex for saddle-saddle propagation.
class SaddleComplex {
 public:
  enum class EdgeKind {
    Critical,    ///< unpaired critical edge entering D1
    Expandable,  ///< paired with a triangle by the gradient
    Negative,    ///< already paired (gradient or D0); unreachable in a valid run
  };

  virtual ~SaddleComplex() = default;
  /// Owned edges only.
  virtual EdgeKind edge_kind(Index edge) const = 0;
  /// Facets of the triangle paired with an owned expandable edge (including the edge).
  virtual void expansion(Index edge, std::vector<EdgeRef>& out) const = 0;
  /// Facets of an owned critical triangle.
  virtual void boundary(Index triangle, std::vector<EdgeRef>& out) const = 0;
};

struct CriticalTriangle {
  Index id = 0;
  SimplexKey key{};
  Index top_vertex = 0;  ///< global id of the highest vertex
};

struct TokenHop {
  Index triangle = 0;
  int src = 0;
  int dst = 0;
};

struct SaddlePairingStats {
  Index rounds = 0;
  Index tokens_sent = 0;
  Index updates_sent = 0;
  Index expansions = 0;
  Index merges = 0;
  Index evictions = 0;
  Index anticipated = 0;
  Index peak_boundary_entries = 0;
  /// Token hand-offs issued by this rank, in issue order.
  std::vector<TokenHop> hops;
};

struct SaddlePairingConfig {
  TransportMode mode = TransportMode::Round;
  /// Per-visit budget of steps past a remote global maximum; 0 disables.
  Index anticipation = 0;
  /// Eager mode: updates/tokens buffered before a send; 0 derives it from the
  /// remaining unpaired triangles.
  Index send_threshold = 0;
  double threshold_fraction = 1e-4;
  /// Eager mode propagation threads per rank.
  int workers = 1;
  /// Hard failure above this many rounds (round mode); 0 derives a bound.
  Index max_rounds = 0;
};

struct SaddlePair {
  Index edge = 0;
  CriticalTriangle triangle;
};

/// Pairs stored on this rank (the edge owner), ascending by edge, plus the
/// triangles whose boundary vanished while this rank held their token.
struct SaddlePairs {
  std::vector<SaddlePair> pairs;
  std::vector<CriticalTriangle> exhausted;
};

/// Distributed homologous propagation. Collective: every rank passes its view
/// and its owned unpaired critical triangles. Each propagation keeps its edges
/// on their owners plus a digest of per-rank upper bounds on their highest
/// edge; only the token holder advances it.
SaddlePairs distributed_pair_critical_simplices(int rank, const SaddleComplex& complex,
                                                const std::vector<CriticalTriangle>& triangles, Transport& transport,
                                                const SaddlePairingConfig& config = {},
                                                SaddlePairingStats* stats = nullptr);

}  // namespace ddms
