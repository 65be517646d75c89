#pragma once

#include <cstdint>
#include <vector>

namespace mrgc {

/// Balanced transportation problem with integer masses and costs.
/// supply.size() × demand.size() cost matrix, row-major.
struct TransportProblem {
  std::vector<std::int64_t> supply;
  std::vector<std::int64_t> demand;
  std::vector<std::int64_t> cost;
};

struct TransportPlan {
  std::int64_t total_cost = 0;
  std::vector<std::int64_t> flow;  ///< same layout as TransportProblem::cost
};

/// Exact optimum by successive shortest paths on the bipartite residual
/// network (Bellman-Ford, so negative residual arcs are fine). Integer
/// arithmetic throughout.
TransportPlan solve_transport(const TransportProblem& problem);

}  // namespace mrgc
