#include "sdelab/jet.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace sdelab {

namespace {

void enumerate(std::size_t vars, std::size_t order, std::vector<int>& cur, std::size_t pos,
               std::vector<std::vector<int>>& out) {
  if (pos + 1 == vars) {
    cur[pos] = static_cast<int>(order);
    out.push_back(cur);
    return;
  }
  for (std::size_t k = order + 1; k-- > 0;) {
    cur[pos] = static_cast<int>(k);
    enumerate(vars, order - k, cur, pos + 1, out);
  }
}

}  // namespace

JetSpace::JetSpace(std::size_t vars, std::size_t degree) : vars_(vars), degree_(degree) {
  if (vars == 0) throw std::invalid_argument("jet needs at least one variable");
  std::vector<int> cur(vars);
  for (std::size_t m = 0; m <= degree; ++m) enumerate(vars, m, cur, 0, index_);
  std::map<std::vector<int>, std::size_t> lookup;
  for (std::size_t k = 0; k < index_.size(); ++k) {
    lookup[index_[k]] = k;
    std::size_t ord = 0;
    double fact = 1.0;
    for (int e : index_[k]) {
      ord += static_cast<std::size_t>(e);
      fact *= std::tgamma(e + 1.0);
    }
    order_.push_back(ord);
    factorial_.push_back(fact);
  }
  for (std::size_t a = 0; a < index_.size(); ++a)
    for (std::size_t b = 0; b < index_.size(); ++b) {
      if (order_[a] + order_[b] > degree) continue;
      std::vector<int> c(vars);
      for (std::size_t i = 0; i < vars; ++i) c[i] = index_[a][i] + index_[b][i];
      products_.push_back({a, b, lookup.at(c)});
    }
}

JetSpace::Jet JetSpace::constant(double c) const {
  Jet j(size(), 0.0);
  j[0] = c;
  return j;
}

JetSpace::Jet JetSpace::variable(std::size_t i, double value) const {
  Jet j = constant(value);
  if (degree_ >= 1) {
    // Degree-one multi-indices follow the constant in reverse lexicographic order.
    for (std::size_t k = 1; k < size() && order_[k] == 1; ++k)
      if (index_[k][i] == 1) j[k] = 1.0;
  }
  return j;
}

JetSpace::Jet JetSpace::add(const Jet& a, const Jet& b) const {
  Jet c(a);
  for (std::size_t k = 0; k < c.size(); ++k) c[k] += b[k];
  return c;
}

JetSpace::Jet JetSpace::mul(const Jet& a, const Jet& b) const {
  Jet c(size(), 0.0);
  for (const Term& t : products_) c[t.c] += a[t.a] * b[t.b];
  return c;
}

JetSpace::Jet JetSpace::series(const Jet& a, const std::vector<double>& coeffs) const {
  // sum_k coeffs[k] h^k with h = a - a0, by Horner.
  Jet h(a);
  h[0] = 0.0;
  Jet acc = constant(coeffs[degree_]);
  for (std::size_t k = degree_; k-- > 0;) {
    acc = mul(acc, h);
    acc[0] += coeffs[k];
  }
  return acc;
}

JetSpace::Jet JetSpace::exp(const Jet& a) const {
  const double e0 = std::exp(a[0]);
  std::vector<double> coeffs(degree_ + 1);
  double f = 1.0;
  for (std::size_t k = 0; k <= degree_; ++k) {
    if (k > 0) f *= static_cast<double>(k);
    coeffs[k] = e0 / f;
  }
  if (e0 == 0.0) return constant(0.0);
  return series(a, coeffs);
}

JetSpace::Jet JetSpace::reciprocal(const Jet& a) const {
  if (a[0] == 0.0) throw std::domain_error("reciprocal of a jet with zero constant term");
  std::vector<double> coeffs(degree_ + 1);
  double p = 1.0 / a[0];
  for (std::size_t k = 0; k <= degree_; ++k) {
    coeffs[k] = p;
    p *= -1.0 / a[0];
  }
  return series(a, coeffs);
}

}  // namespace sdelab
