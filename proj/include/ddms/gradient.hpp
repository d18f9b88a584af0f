#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ddms/grid.hpp"
#include "ddms/order.hpp"
#include "ddms/partition.hpp"

namespace ddms {

/// Discrete gradient over a ghosted block, indexed by block-local simplex id.
///
/// Only the lower stars of owned vertices are processed, so exactly the
/// simplices owned by this block are classified; ghost simplices stay unset.
class DiscreteGradient {
 public:
  enum class State { Unset, Critical, PairedUp, PairedDown };

  DiscreteGradient() = default;
  explicit DiscreteGradient(const Grid& local);

  State state(SimplexId s) const {
    const std::int32_t v = slots_[s.dim][s.index];
    if (v == kUnset) return State::Unset;
    if (v == kCritical) return State::Critical;
    return (v & 1) ? State::PairedUp : State::PairedDown;
  }
  bool is_set(SimplexId s) const { return slots_[s.dim][s.index] != kUnset; }
  bool is_critical(SimplexId s) const { return slots_[s.dim][s.index] == kCritical; }
  /// Partner in the discrete vector containing s, if any.
  std::optional<SimplexId> partner(SimplexId s) const {
    const std::int32_t v = slots_[s.dim][s.index];
    if (v < 0) return std::nullopt;
    return SimplexId{(v & 1) ? s.dim + 1 : s.dim - 1, static_cast<Index>(v >> 1)};
  }

  void set_critical(SimplexId s) { slots_[s.dim][s.index] = kCritical; }
  /// Records the discrete vector {tail < head}.
  void set_pair(SimplexId tail, SimplexId head) {
    slots_[tail.dim][tail.index] = static_cast<std::int32_t>((head.index << 1) | 1);
    slots_[head.dim][head.index] = static_cast<std::int32_t>(tail.index << 1);
  }

  /// Number of per-simplex state slots held (memory accounting).
  Index resident_slots() const;

 private:
  static constexpr std::int32_t kUnset = -1;
  static constexpr std::int32_t kCritical = -2;
  std::array<std::vector<std::int32_t>, 4> slots_;
};

/// Robins et al. lower-star gradient for every owned vertex of the block.
/// local_order gives the global order of each ghosted-box vertex.
DiscreteGradient compute_gradient(const GhostedBlock& block, std::span<const Index> local_order, int threads = 1);

struct CriticalSimplex {
  SimplexId local;
  SimplexKey key;
};

/// Owned critical simplices per dimension, sorted by key.
struct CriticalSet {
  std::array<std::vector<CriticalSimplex>, 4> by_dim;
};

CriticalSet extract_critical(const DiscreteGradient& gradient, const GhostedBlock& block,
                             std::span<const Index> local_order);

struct MatchingReport {
  std::array<Index, 4> critical{};
  Index pairs = 0;        ///< discrete vectors held entirely by this gradient
  Index noncritical = 0;  ///< classified simplices that are not critical
  bool perfect = true;    ///< every non-critical simplex is in one symmetric vector
};

/// Zero-persistence accounting over the classified (owned) simplices.
MatchingReport check_matching(const DiscreteGradient& gradient, const Grid& local);

class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct TraceEnd {
  enum class Kind {
    Extremum,   ///< reached a critical vertex (min side) or top cell (max side)
    GhostExit,  ///< stepped onto a simplex this block does not own
    Outside,    ///< dual path left through the domain boundary
  };
  Kind kind = Kind::Extremum;
  SimplexId simplex{};  ///< local id; meaningless for Outside
};

/// Follows vertex->edge vectors downward from a local vertex.
TraceEnd trace_vpath_min(const DiscreteGradient& gradient, const Grid& local, Index vertex);

/// Follows the gradient in reverse through top-dimensional cells (tetrahedra
/// in 3D, triangles in 2D) starting at the given top cell.
TraceEnd trace_vpath_max(const DiscreteGradient& gradient, const Grid& local, SimplexId top_cell);

}  // namespace ddms
