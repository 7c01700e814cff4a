#pragma once

#include <cstddef>
#include <vector>

namespace sdelab {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point rule by Newton iteration on the Legendre recurrence (cached).
const GaussRule& gauss_legendre(std::size_t n);

/// Composite rule on [a, b]: `panels` equal panels with the n-point rule.
/// Appends to nodes/weights.
void composite_rule(double a, double b, std::size_t panels, std::size_t n, std::vector<double>& nodes,
                    std::vector<double>& weights);

}  // namespace sdelab
