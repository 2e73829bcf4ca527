#include "detail/max_flow.hpp"

#include <algorithm>
#include <deque>
#include <limits>

namespace mkot::detail {

std::size_t MaxFlow::add_edge(std::size_t from, std::size_t to, double capacity) {
  const std::size_t e = edges_.size();
  edges_.push_back({to, capacity, 0.0});
  edges_.push_back({from, 0.0, 0.0});
  adjacency_[from].push_back(e);
  adjacency_[to].push_back(e + 1);
  return e;
}

double MaxFlow::run(std::size_t source, std::size_t sink, double eps) {
  const std::size_t n = adjacency_.size();
  double total = 0.0;
  std::vector<std::size_t> via(n);
  for (;;) {
    reachable_.assign(n, 0);
    reachable_[source] = 1;
    std::deque<std::size_t> queue{source};
    while (!queue.empty() && !reachable_[sink]) {
      const std::size_t u = queue.front();
      queue.pop_front();
      for (std::size_t e : adjacency_[u]) {
        const std::size_t v = edges_[e].to;
        if (reachable_[v] || residual(e) <= eps) continue;
        reachable_[v] = 1;
        via[v] = e;
        queue.push_back(v);
      }
    }
    if (!reachable_[sink]) return total;

    double push = std::numeric_limits<double>::infinity();
    for (std::size_t v = sink; v != source; v = edges_[via[v] ^ 1].to)
      push = std::min(push, residual(via[v]));
    for (std::size_t v = sink; v != source; v = edges_[via[v] ^ 1].to) {
      edges_[via[v]].flow += push;
      edges_[via[v] ^ 1].flow -= push;
    }
    total += push;
  }
}

}  // namespace mkot::detail
