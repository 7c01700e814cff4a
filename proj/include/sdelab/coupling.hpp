#pragma once

// Couplings of two discrete measures: the threshold (Strassen) construction
// and min-cost plans, with the re-embedded error functionals.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sdelab/error.hpp"
#include "sdelab/exact.hpp"
#include "sdelab/flow.hpp"
#include "sdelab/measure.hpp"

namespace sdelab {

/// Sparse joint weights pi_ij = mass / denominator over atom pairs.
struct CouplingPlan {
  std::shared_ptr<const DiscreteMeasure> mu;
  std::shared_ptr<const DiscreteMeasure> nu;
  std::vector<FlowEntry> entries;  // sorted by (i, j), masses > 0
  std::vector<double> distance;    // d(mu_i, nu_j) per entry
  std::int64_t denominator = 1;

  Exact weight(std::size_t k) const { return Exact(entries[k].mass) / Exact(denominator); }
};

class CouplingInfeasible : public Error {
 public:
  CouplingInfeasible(double alpha, Exact min_tail);
  /// Smallest tail mass{d > alpha} any coupling achieves.
  const Exact& min_tail() const noexcept { return min_tail_; }

 private:
  Exact min_tail_;
};

/// Plan with mass{d > alpha} <= alpha: max flow on pairs at distance <= alpha,
/// leftover mass routed lexicographically (north-west corner over (i, j)).
CouplingPlan strassen_couple(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double alpha);

/// Optimal plan for the W1 cost.
CouplingPlan min_cost_plan(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// Row and column sums equal the marginal weights exactly.
bool marginals_exact(const CouplingPlan& plan);

double coupled_mean_distance(const CouplingPlan& plan);

Exact coupled_tail_exact(const CouplingPlan& plan, double threshold);
double coupled_tail(const CouplingPlan& plan, double threshold);

/// (E d^q1)^(1/q1) alpha^(1/q2) + alpha; requires 1/q1 + 1/q2 = 1, q1 > 1,
/// and tail(alpha) <= alpha.
double holder_chain_bound(const CouplingPlan& plan, double alpha, double q1, double q2);

/// CSV triplets i,j,weight plus a JSON sidecar at `<path>.json`.
void write_plan_csv(const std::string& path, const CouplingPlan& plan, const nlohmann::json& sidecar);

}  // namespace sdelab
