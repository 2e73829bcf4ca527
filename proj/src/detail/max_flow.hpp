#pragma once

// Edmonds-Karp max-flow on real capacities, used to decide whether the
// marginals can be coupled on the finite-cost mask.

#include <cstddef>
#include <vector>

namespace mkot::detail {

class MaxFlow {
 public:
  explicit MaxFlow(std::size_t nodes) : adjacency_(nodes) {}

  /// Returns the index of the forward edge; capacity may be +inf.
  std::size_t add_edge(std::size_t from, std::size_t to, double capacity);

  /// Augments until no path with residual above eps remains.
  double run(std::size_t source, std::size_t sink, double eps);

  double flow(std::size_t edge) const { return edges_[edge].flow; }
  /// Nodes reachable from the source in the final residual graph.
  const std::vector<char>& source_side() const { return reachable_; }

 private:
  struct Edge {
    std::size_t to;
    double capacity;
    double flow;
  };
  double residual(std::size_t e) const { return edges_[e].capacity - edges_[e].flow; }

  std::vector<Edge> edges_;  // edge e and its reverse e ^ 1
  std::vector<std::vector<std::size_t>> adjacency_;
  std::vector<char> reachable_;
};

}  // namespace mkot::detail
