#include "detail/shortest_paths.hpp"

#include <algorithm>
#include <stdexcept>

namespace mkot::detail {

namespace {
constexpr std::size_t kNone = static_cast<std::size_t>(-1);
}

ShortestPaths bellman_ford(std::size_t nodes, std::span<const WeightedEdge> edges,
                           std::vector<double> initial) {
  if (initial.size() != nodes) throw std::invalid_argument("initial distance size mismatch");
  ShortestPaths out;
  out.distance = std::move(initial);
  std::vector<double>& dist = out.distance;
  std::vector<std::size_t> pred(nodes, kNone);

  std::size_t last_relaxed = kNone;
  for (std::size_t pass = 0; pass <= nodes; ++pass) {
    last_relaxed = kNone;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const WeightedEdge& edge = edges[e];
      const double candidate = dist[edge.from] + edge.weight;
      if (candidate < dist[edge.to]) {
        dist[edge.to] = candidate;
        pred[edge.to] = e;
        last_relaxed = edge.to;
      }
    }
    if (last_relaxed == kNone) return out;
  }

  // Still relaxing after |V| + 1 passes: walk predecessors |V| times to land
  // on the cycle, then collect it.
  std::size_t v = last_relaxed;
  for (std::size_t k = 0; k < nodes; ++k) v = edges[pred[v]].from;
  const std::size_t start = v;
  do {
    out.negative_cycle.push_back(pred[v]);
    v = edges[pred[v]].from;
  } while (v != start);
  std::reverse(out.negative_cycle.begin(), out.negative_cycle.end());
  return out;
}

}  // namespace mkot::detail
