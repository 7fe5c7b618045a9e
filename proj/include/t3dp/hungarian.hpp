#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "t3dp/tensor.hpp"

namespace t3dp {

struct Assignment {
  // (row, column) pairs sorted by row.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  double cost = 0.0;
};

/// Minimum-cost assignment of size min(rows, cols) (shortest augmenting path
/// with dual potentials, O(n^2 m)). Rows are inserted in index order and the
/// column scan keeps the first minimum, so ties resolve deterministically
/// towards lower indices. An empty matrix yields an empty assignment.
Assignment hungarian(const Matrix& cost);

}  // namespace t3dp
