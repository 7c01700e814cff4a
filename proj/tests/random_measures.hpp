#pragma once

#include <cstdint>
#include <vector>

#include "sdelab/measure.hpp"
#include "sdelab/noise.hpp"

namespace testutil {

// Deterministic pseudo-random measures for property tests. Coordinates come
// from a coarse grid half of the time so that ties and repeated distances
// occur.
class MeasureFactory {
 public:
  explicit MeasureFactory(std::uint64_t seed) : stream_(seed, 0) {}

  double uniform() {
    const std::uint64_t c = counter_++;
    return stream_.uniform(c >> 20, static_cast<std::uint32_t>(c));
  }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }

  sdelab::DiscreteMeasure measure(std::size_t atoms, std::size_t dim, bool rational_weights, bool grid) {
    std::vector<double> pts(atoms * dim);
    for (double& v : pts) v = grid ? 0.25 * static_cast<double>(below(9)) : 2.0 * uniform();
    if (!rational_weights) return sdelab::DiscreteMeasure::uniform(dim, pts);
    std::vector<long long> raw(atoms);
    long long total = 0;
    for (auto& r : raw) total += (r = 1 + static_cast<long long>(below(7)));
    std::vector<sdelab::Exact> w;
    for (auto r : raw) w.emplace_back(r, total);
    return sdelab::DiscreteMeasure::weighted(dim, pts, std::move(w));
  }

 private:
  sdelab::NoiseStream stream_;
  std::uint64_t counter_ = 0;
};

inline sdelab::DiscreteMeasure points1d(std::vector<double> xs, std::vector<sdelab::Exact> w = {}) {
  if (w.empty()) return sdelab::DiscreteMeasure::uniform(1, xs);
  return sdelab::DiscreteMeasure::weighted(1, xs, std::move(w));
}

}  // namespace testutil
