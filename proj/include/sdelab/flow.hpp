#pragma once

// Integer max-flow on bipartite transport graphs restricted to atom pairs
// within a distance threshold.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sdelab/measure.hpp"

namespace sdelab {

/// Row-major table of atom distances d(mu_i, nu_j) as computed by the
/// distance kernel. Every threshold comparison in the library uses these
/// doubles, so all solvers see the same edge sets.
struct DistanceTable {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> d;

  double operator()(std::size_t i, std::size_t j) const { return d[i * cols + j]; }
};

DistanceTable distance_table(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// Distance between two points with the kernel's operation order.
double point_distance(const double* a, const double* b, std::size_t dim);

/// Measure weights scaled by a common denominator to integers.
struct IntegerMasses {
  std::vector<std::int64_t> row;
  std::vector<std::int64_t> col;
  std::int64_t total = 0;  // common denominator L; both sides sum to L
};

IntegerMasses integer_masses(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

struct FlowEntry {
  std::uint32_t i;
  std::uint32_t j;
  std::int64_t mass;
};

struct IntegerFlow {
  std::int64_t value = 0;
  std::vector<FlowEntry> entries;  // sorted by (i, j)
};

/// Dinic max flow over pairs with table(i, j) <= t.
IntegerFlow dinic_threshold_flow(const DistanceTable& table, const IntegerMasses& masses, double t);

/// One-dimensional max flow with the same edge predicate |x - y| <= t, by the
/// leftmost-first greedy on sorted atoms (edge windows are intervals whose
/// endpoints move monotonically).
IntegerFlow greedy_threshold_flow_1d(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                       const IntegerMasses& masses, double t);

/// General Dinic solver on an explicit graph.
class Dinic {
 public:
  explicit Dinic(std::size_t nodes);
  std::size_t add_edge(std::size_t from, std::size_t to, std::int64_t capacity);
  std::int64_t max_flow(std::size_t source, std::size_t sink);
  std::int64_t flow(std::size_t edge) const;

 private:
  struct Edge {
    std::size_t to;
    std::int64_t cap;
  };
  bool bfs(std::size_t s, std::size_t t);
  std::int64_t dfs(std::size_t v, std::size_t t, std::int64_t pushed);

  std::vector<Edge> edges_;
  std::vector<std::int64_t> original_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<int> level_;
  std::vector<std::size_t> it_;
};

}  // namespace sdelab
