#pragma once

// Finitely supported probability measures on R^n with rational weights.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sdelab/exact.hpp"

namespace sdelab {

class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;

  /// Equal weights 1/M on the rows of `points` (row-major, M x dim).
  static DiscreteMeasure uniform(std::size_t dim, std::span<const double> points);

  /// Weighted atoms; weights must be positive and sum to exactly 1.
  static DiscreteMeasure weighted(std::size_t dim, std::span<const double> points,
                                  std::vector<Exact> weights);

  std::size_t size() const noexcept { return size_; }
  std::size_t dim() const noexcept { return dim_; }
  bool is_uniform() const noexcept { return weights_.empty(); }

  double coord(std::size_t atom, std::size_t axis) const { return soa_[axis * size_ + atom]; }
  /// Coordinates stored axis by axis: dim blocks of size() doubles.
  const double* soa() const noexcept { return soa_.data(); }
  void point(std::size_t atom, std::span<double> out) const;

  Exact weight(std::size_t atom) const;
  double weight_double(std::size_t atom) const;
  /// Explicit weight vector (materialized for uniform measures).
  std::vector<Exact> weights() const;

  /// Uniform subsample of `budget` atoms without replacement, renormalized to
  /// equal weights. Returns a copy when size() <= budget. Requires a uniform measure.
  DiscreteMeasure subsample(std::size_t budget, std::uint64_t seed) const;

  /// Atoms restricted to `indices` with equal weights.
  DiscreteMeasure select(std::span<const std::size_t> indices) const;

 private:
  std::size_t dim_ = 0;
  std::size_t size_ = 0;
  std::vector<double> soa_;
  std::vector<Exact> weights_;
};

/// CSV with header x1..xn[,weight]. A missing weight column means equal weights.
DiscreteMeasure read_measure_csv(const std::string& path);
void write_measure_csv(const std::string& path, const DiscreteMeasure& measure);

/// "%.17g".
std::string format_real(double value);

}  // namespace sdelab
