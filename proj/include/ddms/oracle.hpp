#pragma once

#include <span>
#include <stdexcept>

#include "ddms/diagram.hpp"
#include "ddms/grid.hpp"

namespace ddms {

inline constexpr Index kOracleSimplexLimit = 200000;

/// Standard left-to-right Z2 reduction of the full boundary matrix, columns
/// in filtration (SimplexKey) order. Pairs of zero order-persistence are
/// dropped by canonicalization. Throws SizingError above kOracleSimplexLimit.
Diagram reduce_matrix(const Grid& grid, std::span<const Index> order, std::span<const double> scalars);

/// Elder-rule union-find sweep over vertices; D0 only.
Diagram d0_unionfind(const Grid& grid, std::span<const Index> order, std::span<const double> scalars);

}  // namespace ddms
