#include "mrgc/transport.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "mrgc/error.hpp"

namespace mrgc {

namespace {

struct Arc {
  std::size_t to;
  std::size_t reverse;
  std::int64_t capacity;
  std::int64_t cost;
};

class FlowNetwork {
 public:
  explicit FlowNetwork(std::size_t nodes) : arcs_(nodes) {}

  std::size_t add_arc(std::size_t from, std::size_t to, std::int64_t capacity, std::int64_t cost) {
    arcs_[from].push_back({to, arcs_[to].size(), capacity, cost});
    arcs_[to].push_back({from, arcs_[from].size() - 1, 0, -cost});
    return arcs_[from].size() - 1;
  }

  const Arc& arc(std::size_t from, std::size_t index) const { return arcs_[from][index]; }

  /// Pushes `amount` units along successive cheapest paths; returns the cost.
  std::int64_t min_cost_flow(std::size_t source, std::size_t sink, std::int64_t amount) {
    constexpr auto inf = std::numeric_limits<std::int64_t>::max();
    const std::size_t n = arcs_.size();
    std::int64_t total = 0;
    while (amount > 0) {
      std::vector<std::int64_t> dist(n, inf);
      std::vector<std::size_t> prev_node(n, n), prev_arc(n, 0);
      dist[source] = 0;
      for (std::size_t round = 0; round < n; ++round) {
        bool changed = false;
        for (std::size_t u = 0; u < n; ++u) {
          if (dist[u] == inf) continue;
          for (std::size_t a = 0; a < arcs_[u].size(); ++a) {
            const Arc& e = arcs_[u][a];
            if (e.capacity > 0 && dist[u] + e.cost < dist[e.to]) {
              dist[e.to] = dist[u] + e.cost;
              prev_node[e.to] = u;
              prev_arc[e.to] = a;
              changed = true;
            }
          }
        }
        if (!changed) break;
      }
      if (dist[sink] == inf) fail(ErrorKind::disconnected_supports, "transport demand unreachable");
      std::int64_t push = amount;
      for (std::size_t v = sink; v != source; v = prev_node[v])
        push = std::min(push, arcs_[prev_node[v]][prev_arc[v]].capacity);
      for (std::size_t v = sink; v != source; v = prev_node[v]) {
        Arc& e = arcs_[prev_node[v]][prev_arc[v]];
        e.capacity -= push;
        arcs_[v][e.reverse].capacity += push;
      }
      total += push * dist[sink];
      amount -= push;
    }
    return total;
  }

 private:
  std::vector<std::vector<Arc>> arcs_;
};

}  // namespace

TransportPlan solve_transport(const TransportProblem& problem) {
  const std::size_t ns = problem.supply.size();
  const std::size_t nd = problem.demand.size();
  if (problem.cost.size() != ns * nd) fail(ErrorKind::dimension_mismatch, "transport cost matrix");
  const auto total_supply = std::accumulate(problem.supply.begin(), problem.supply.end(), std::int64_t{0});
  const auto total_demand = std::accumulate(problem.demand.begin(), problem.demand.end(), std::int64_t{0});
  if (total_supply != total_demand) fail(ErrorKind::invariant, "unbalanced transport problem");

  const std::size_t source = ns + nd;
  const std::size_t sink = source + 1;
  FlowNetwork net(sink + 1);
  for (std::size_t a = 0; a < ns; ++a) net.add_arc(source, a, problem.supply[a], 0);
  for (std::size_t b = 0; b < nd; ++b) net.add_arc(ns + b, sink, problem.demand[b], 0);
  std::vector<std::size_t> handles(ns * nd);
  for (std::size_t a = 0; a < ns; ++a)
    for (std::size_t b = 0; b < nd; ++b)
      handles[a * nd + b] = net.add_arc(a, ns + b, total_supply, problem.cost[a * nd + b]);

  TransportPlan plan;
  plan.total_cost = net.min_cost_flow(source, sink, total_supply);
  plan.flow.resize(ns * nd);
  for (std::size_t a = 0; a < ns; ++a)
    for (std::size_t b = 0; b < nd; ++b)
      plan.flow[a * nd + b] = total_supply - net.arc(a, handles[a * nd + b]).capacity;
  return plan;
}

}  // namespace mrgc
