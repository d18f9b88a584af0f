#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "ddms/diagram.hpp"
#include "ddms/gradient.hpp"
#include "ddms/grid.hpp"
#include "ddms/order.hpp"

namespace ddms {

/// Pairing age of a graph node: smaller is elder. Extremum-graph code only
/// compares ages, so the max side stores negated keys.
using Age = std::array<Index, 4>;

inline Age min_side_age(const SimplexKey& key) { return key; }
inline Age max_side_age(const SimplexKey& key) { return {-key[0], -key[1], -key[2], -key[3]}; }
/// The virtual maximum beyond the domain boundary; elder than every real node.
inline constexpr Age kOutsideAge = {std::numeric_limits<Index>::min(), 0, 0, 0};

enum class Side { Min, Max };

/// Arc pair of one saddle: saddle index and the two extremum node indices.
struct Triplet {
  Index saddle = 0;
  Index t0 = 0;
  Index t1 = 0;
};

/// Extremum graph over global simplex ids. Node 0 of a max-side graph is the
/// virtual outside node (extrema[0] is then meaningless).
struct ExtremumGraph {
  Side side = Side::Min;
  std::vector<SimplexId> extrema;
  std::vector<Age> extremum_age;
  std::vector<SimplexId> saddles;
  std::vector<Age> saddle_age;
  /// Sorted by ascending saddle age.
  std::vector<Triplet> triplets;

  bool has_outside() const { return side == Side::Max; }
};

/// Traces the v-paths of every critical saddle of the given side.
/// Min side: saddles are critical edges (minus `skip`), extrema critical vertices.
/// Max side: saddles are critical cells of dimension top-1, extrema critical top cells.
ExtremumGraph build_extremum_graph(const Grid& grid, const DiscreteGradient& gradient, const CriticalSet& critical,
                                   std::span<const Index> order, Side side, std::span<const SimplexId> skip = {});

struct ExtremumPairing {
  /// (saddle, extremum) node indices.
  std::vector<std::pair<Index, Index>> pairs;
  std::vector<Index> representative;
  std::vector<Index> extremum_pair;  ///< saddle index or -1
};

/// Union-find sweep over triplets in ascending saddle age; pairs the younger
/// representative with the saddle and collapses the arc.
ExtremumPairing pair_extrema_saddles(std::span<const Triplet> triplets, std::span<const Age> extremum_age);

/// Unpaired critical 2-simplices / 1-simplices entering the D1 propagation.
struct SaddleSaddleInput {
  std::vector<SimplexId> triangles;
  std::vector<SimplexId> edges;
};

struct PropagationOptions {
  bool randomized = false;
  std::uint64_t seed = 0;
};

struct PropagationStats {
  Index expansions = 0;
  Index merges = 0;
  Index evictions = 0;
  Index peak_boundary_entries = 0;
};

/// Homologous propagation (with displacement of younger claimants) over the
/// full grid. Returns (edge, triangle) pairs.
std::vector<std::pair<SimplexId, SimplexId>> pair_critical_simplices(const Grid& grid,
                                                                     const DiscreteGradient& gradient,
                                                                     std::span<const Index> order,
                                                                     const SaddleSaddleInput& input,
                                                                     const PropagationOptions& options = {},
                                                                     PropagationStats* stats = nullptr);

struct StepTimes {
  double order = 0;
  double gradient = 0;
  double extract = 0;
  double d0 = 0;
  double d2 = 0;
  double d1 = 0;
};

struct RunStats {
  StepTimes seconds;
  std::array<Index, 4> critical{};
  /// Zero-persistence accounting: non-critical simplices matched by the gradient.
  Index gradient_pairs = 0;
  Index noncritical = 0;
  /// Every non-critical simplex is in exactly one symmetric discrete vector.
  bool matching_perfect = true;
  PropagationStats propagation;
  /// Per-rank peak of gradient slots + order entries + boundary entries.
  std::vector<Index> resident_state;
};

struct SingleOptions {
  int threads = 1;
  PropagationOptions propagation;
};

Diagram compute_diagram_single(const Grid& grid, std::span<const double> scalars, const SingleOptions& options = {},
                               RunStats* stats = nullptr);

}  // namespace ddms
