#pragma once

// Truncated multivariate Taylor polynomials ("jets") for exact derivatives
// of closed-form test functions.

#include <cstddef>
#include <vector>

namespace sdelab {

class JetSpace {
 public:
  JetSpace(std::size_t vars, std::size_t degree);

  std::size_t vars() const noexcept { return vars_; }
  std::size_t degree() const noexcept { return degree_; }
  std::size_t size() const noexcept { return index_.size(); }
  /// Multi-index of coefficient k; graded order, constant term first.
  const std::vector<int>& multi_index(std::size_t k) const { return index_[k]; }
  std::size_t total_order(std::size_t k) const { return order_[k]; }
  /// alpha! for coefficient k (coefficient times alpha! is D^alpha).
  double factorial(std::size_t k) const { return factorial_[k]; }

  using Jet = std::vector<double>;

  Jet constant(double c) const;
  /// x_i = value + t_i.
  Jet variable(std::size_t i, double value) const;
  Jet add(const Jet& a, const Jet& b) const;
  Jet mul(const Jet& a, const Jet& b) const;
  Jet exp(const Jet& a) const;
  Jet reciprocal(const Jet& a) const;

 private:
  // 1 + x + ... + x^degree / degree! style series around the constant term.
  Jet series(const Jet& a, const std::vector<double>& coeffs) const;

  std::size_t vars_, degree_;
  std::vector<std::vector<int>> index_;
  std::vector<std::size_t> order_;
  std::vector<double> factorial_;
  struct Term {
    std::size_t a, b, c;
  };
  std::vector<Term> products_;
};

}  // namespace sdelab
