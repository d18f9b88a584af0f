#pragma once

#include <array>
#include <compare>
#include <span>
#include <vector>

#include "ddms/grid.hpp"
#include "ddms/partition.hpp"
#include "ddms/transport.hpp"

namespace ddms {

/// Vertex id -> rank of (value, id) in the global sort. Injective, so it
/// replaces the scalar field for every comparison.
using GlobalOrder = std::vector<Index>;

GlobalOrder order_sequential(std::span<const double> scalars);

/// Distributed counterpart of order_sequential: a regular-sampling sample sort
/// of the owned vertices, results returned to the owners and then to ghosts.
/// local_scalars covers the ghosted box of this rank's block (local vertex
/// indices); the returned order does too. Collective over the transport.
GlobalOrder order_distributed(int rank, const Partition& partition, std::span<const double> local_scalars,
                              Transport& transport);

/// Vertex orders of a simplex in decreasing order, padded with -1. Plain
/// lexicographic comparison of keys is the filtration order: it is strict
/// within a dimension and puts every face before its cofaces.
using SimplexKey = std::array<Index, 4>;

SimplexKey simplex_key(const Grid& grid, std::span<const Index> order, SimplexId s);

inline std::strong_ordering compare(const SimplexKey& a, const SimplexKey& b) { return a <=> b; }

/// Highest vertex of s under the order.
Index top_vertex(const Grid& grid, std::span<const Index> order, SimplexId s);

}  // namespace ddms
