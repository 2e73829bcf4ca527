#include "detail/network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mkot::detail {

namespace {

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

class NetworkSimplex {
 public:
  NetworkSimplex(const FlowProblem& problem, double cost_tolerance)
      : real_arcs_(problem.arcs.size()),
        nodes_(problem.nodes + 1),
        root_(problem.nodes),
        tolerance_(cost_tolerance) {
    if (problem.supply.size() != problem.nodes)
      throw std::invalid_argument("supply size does not match node count");
    double max_cost = 0.0;
    for (const FlowArc& a : problem.arcs) {
      if (a.tail >= problem.nodes || a.head >= problem.nodes)
        throw std::invalid_argument("arc endpoint out of range");
      if (!std::isfinite(a.cost)) throw std::invalid_argument("arc cost must be finite");
      max_cost = std::max(max_cost, std::abs(a.cost));
    }
    // Any cycle through the root costs at least 2M minus a simple real path,
    // so artificial flow never survives at an optimum of a feasible problem.
    const double big_m = (1.0 + max_cost) * static_cast<double>(nodes_);

    arcs_ = problem.arcs;
    supply_ = problem.supply;
    supply_.push_back(0.0);
    double total = 0.0;
    for (double s : problem.supply) total += std::abs(s);
    flow_eps_ = 1e-13 * std::max(1.0, total);

    in_tree_.assign(real_arcs_, 0);
    for (std::size_t v = 0; v < problem.nodes; ++v) {
      if (supply_[v] >= 0.0)
        arcs_.push_back({v, root_, big_m});
      else
        arcs_.push_back({root_, v, big_m});
      in_tree_.push_back(1);
    }
    parent_.resize(nodes_);
    parent_arc_.resize(nodes_);
    depth_.resize(nodes_);
    potential_.resize(nodes_);
    subtree_supply_.resize(nodes_);
    flow_.assign(arcs_.size(), 0.0);
  }

  FlowSolution run(std::size_t max_iterations) {
    FlowSolution out;
    for (;;) {
      rebuild_tree();
      const std::size_t entering = price();
      if (entering == kNone) {
        out.status = FlowStatus::optimal;
        break;
      }
      if (out.iterations >= max_iterations) {
        out.status = FlowStatus::iteration_limit;
        break;
      }
      pivot(entering);
      ++out.iterations;
    }
    out.flow.assign(flow_.begin(), flow_.begin() + static_cast<std::ptrdiff_t>(real_arcs_));
    out.potential.assign(potential_.begin(), potential_.begin() + static_cast<std::ptrdiff_t>(root_));
    for (std::size_t a = real_arcs_; a < arcs_.size(); ++a)
      if (in_tree_[a]) out.artificial_flow = std::max(out.artificial_flow, flow_[a]);
    if (out.status == FlowStatus::optimal && out.artificial_flow > flow_eps_)
      out.status = FlowStatus::infeasible;
    return out;
  }

 private:
  // Recomputes parent pointers, depths, potentials and tree flows from the
  // current set of tree arcs. Flows are solved from supplies rather than
  // updated incrementally, which keeps marginal residuals at rounding level.
  void rebuild_tree() {
    adjacency_.assign(nodes_, {});
    for (std::size_t a = 0; a < arcs_.size(); ++a) {
      if (!in_tree_[a]) continue;
      adjacency_[arcs_[a].tail].push_back(a);
      adjacency_[arcs_[a].head].push_back(a);
    }
    order_.clear();
    order_.push_back(root_);
    std::fill(parent_.begin(), parent_.end(), kNone);
    parent_arc_[root_] = kNone;
    depth_[root_] = 0;
    potential_[root_] = 0.0;
    std::vector<char> seen(nodes_, 0);
    seen[root_] = 1;
    for (std::size_t k = 0; k < order_.size(); ++k) {
      const std::size_t u = order_[k];
      for (std::size_t a : adjacency_[u]) {
        const FlowArc& arc = arcs_[a];
        const std::size_t v = arc.tail == u ? arc.head : arc.tail;
        if (seen[v]) continue;
        seen[v] = 1;
        parent_[v] = u;
        parent_arc_[v] = a;
        depth_[v] = depth_[u] + 1;
        potential_[v] = arc.tail == v ? potential_[u] + arc.cost : potential_[u] - arc.cost;
        order_.push_back(v);
      }
    }
    if (order_.size() != nodes_) throw std::logic_error("network simplex tree is not spanning");

    std::fill(flow_.begin(), flow_.end(), 0.0);
    for (std::size_t v = 0; v < nodes_; ++v) subtree_supply_[v] = supply_[v];
    for (std::size_t k = order_.size(); k-- > 1;) {
      const std::size_t v = order_[k];
      const std::size_t a = parent_arc_[v];
      flow_[a] = arcs_[a].tail == v ? subtree_supply_[v] : -subtree_supply_[v];
      subtree_supply_[parent_[v]] += subtree_supply_[v];
    }
  }

  double reduced_cost(std::size_t a) const {
    return arcs_[a].cost - potential_[arcs_[a].tail] + potential_[arcs_[a].head];
  }

  // Lowest-index eligible arc. Artificial arcs never re-enter.
  std::size_t price() const {
    for (std::size_t a = 0; a < real_arcs_; ++a)
      if (!in_tree_[a] && reduced_cost(a) < -tolerance_) return a;
    return kNone;
  }

  void pivot(std::size_t entering) {
    // Push flow tail -> head around the cycle closed by the entering arc.
    std::size_t u = arcs_[entering].tail;
    std::size_t w = arcs_[entering].head;
    std::vector<std::size_t> tail_side;  // from the tail up to the apex
    std::vector<std::size_t> head_side;  // from the head up to the apex
    while (u != w) {
      if (depth_[u] >= depth_[w]) {
        tail_side.push_back(u);
        u = parent_[u];
      } else {
        head_side.push_back(w);
        w = parent_[w];
      }
    }
    // Head side is walked upward (node -> parent): backward if the arc points down.
    // Tail side is walked downward (parent -> node): backward if the arc points up.
    auto head_backward = [&](std::size_t x) { return arcs_[parent_arc_[x]].head == x; };
    auto tail_backward = [&](std::size_t x) { return arcs_[parent_arc_[x]].tail == x; };

    double delta = std::numeric_limits<double>::infinity();
    for (std::size_t x : head_side)
      if (head_backward(x)) delta = std::min(delta, std::max(0.0, flow_[parent_arc_[x]]));
    for (std::size_t x : tail_side)
      if (tail_backward(x)) delta = std::min(delta, std::max(0.0, flow_[parent_arc_[x]]));
    if (delta == std::numeric_limits<double>::infinity())
      throw std::runtime_error("min-cost flow is unbounded (negative cycle)");

    // Leaving arc: the last blocking arc met when walking the cycle from the
    // apex in the direction of the entering arc.
    std::size_t leaving = kNone;
    for (std::size_t k = head_side.size(); k-- > 0 && leaving == kNone;) {
      const std::size_t x = head_side[k];
      if (head_backward(x) && flow_[parent_arc_[x]] <= delta + flow_eps_) leaving = parent_arc_[x];
    }
    for (std::size_t k = 0; k < tail_side.size() && leaving == kNone; ++k) {
      const std::size_t x = tail_side[k];
      if (tail_backward(x) && flow_[parent_arc_[x]] <= delta + flow_eps_) leaving = parent_arc_[x];
    }
    if (leaving == kNone) throw std::logic_error("network simplex found no leaving arc");
    in_tree_[leaving] = 0;
    in_tree_[entering] = 1;
  }

  std::size_t real_arcs_;
  std::size_t nodes_;
  std::size_t root_;
  double tolerance_;
  double flow_eps_ = 0.0;
  std::vector<FlowArc> arcs_;
  std::vector<double> supply_;
  std::vector<char> in_tree_;
  std::vector<std::vector<std::size_t>> adjacency_;
  std::vector<std::size_t> order_;
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> parent_arc_;
  std::vector<std::size_t> depth_;
  std::vector<double> potential_;
  std::vector<double> subtree_supply_;
  std::vector<double> flow_;
};

}  // namespace

FlowSolution solve_min_cost_flow(const FlowProblem& problem, double cost_tolerance,
                                 std::size_t max_iterations) {
  return NetworkSimplex(problem, cost_tolerance).run(max_iterations);
}

}  // namespace mkot::detail
