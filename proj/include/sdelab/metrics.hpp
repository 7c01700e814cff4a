#pragma once

// Prokhorov and Wasserstein-1 distances between discrete measures.

#include "sdelab/exact.hpp"
#include "sdelab/flow.hpp"
#include "sdelab/measure.hpp"

namespace sdelab {

/// Max flow along pairs at distance <= t: the 1D greedy when both measures
/// are one-dimensional, Dinic otherwise.
IntegerFlow threshold_flow(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const DistanceTable& table,
                           const IntegerMasses& masses, double t);

struct ProkhorovResult {
  Exact value;
  /// Smallest candidate distance t with 1 - M(t) <= t.
  double threshold = 0.0;

  /// Smallest double >= value; a threshold at which a Strassen coupling exists.
  double upper() const { return round_up(value); }
};

/// rho = min(1, min_t max(t, 1 - M(t))) over t in {0} and the atom
/// distances, with M(t) the max mass movable along pairs at distance <= t.
ProkhorovResult prokhorov_exact_result(const DiscreteMeasure& mu, const DiscreteMeasure& nu);
double prokhorov_exact(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// Enumerates every subset A of the union support, both orderings, with the
/// closed fattening A^e = {y : d(y, A) <= e}. Total support at most 20.
Exact prokhorov_bruteforce_value(const DiscreteMeasure& mu, const DiscreteMeasure& nu);
double prokhorov_bruteforce(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// Sorted coupling for equal-size equal-weight 1D measures; min-cost flow otherwise.
double wasserstein1(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

}  // namespace sdelab
