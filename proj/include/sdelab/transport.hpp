#pragma once

#include "sdelab/flow.hpp"

namespace sdelab {

/// Minimum-cost transport between integer masses with costs table(i, j), by
/// successive shortest paths with Dijkstra on reduced costs. Returns the
/// optimal plan; entries sorted by (i, j).
IntegerFlow min_cost_transport(const DistanceTable& table, const IntegerMasses& masses);

/// sum_k mass_k table(i_k, j_k) / total, accumulated in entry order.
double plan_cost(const DistanceTable& table, const IntegerFlow& plan, std::int64_t total);

}  // namespace sdelab
