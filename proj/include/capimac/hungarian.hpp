#pragma once

#include <limits>
#include <utility>
#include <vector>

#include "capimac/types.hpp"

namespace capimac {

inline constexpr Index kUnassigned = std::numeric_limits<Index>::max();

/// Minimum-cost one-to-one assignment.
struct Assignment {
  /// (row, col) pairs sorted by row; min(rows, cols) of them.
  std::vector<std::pair<Index, Index>> pairs;
  /// Column per row, kUnassigned when the row is left out (rows > cols).
  IndexList row_to_col;
  double total_cost = 0.0;
};

/// Kuhn-Munkres with potentials, O(n^3). Rectangular inputs match every row
/// of the smaller side. Among optimal assignments the lexicographically
/// smallest pair list is returned.
Assignment hungarian(const Matrix& cost);

}  // namespace capimac
