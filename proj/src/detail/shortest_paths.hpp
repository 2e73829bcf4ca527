#pragma once

// Bellman-Ford for systems of difference constraints x[to] <= x[from] + weight,
// started from arbitrary initial values, with negative-cycle extraction.

#include <cstddef>
#include <span>
#include <vector>

namespace mkot::detail {

struct WeightedEdge {
  std::size_t from = 0;
  std::size_t to = 0;
  double weight = 0.0;
};

struct ShortestPaths {
  std::vector<double> distance;
  /// Edge indices of a negative cycle in traversal order; empty if none.
  std::vector<std::size_t> negative_cycle;
};

/// Equivalent to a virtual source joined to every node v by an edge of weight
/// initial[v]. With an all-zero start the result is the largest solution <= 0;
/// with a feasible start nothing moves.
ShortestPaths bellman_ford(std::size_t nodes, std::span<const WeightedEdge> edges,
                           std::vector<double> initial);

}  // namespace mkot::detail
