#include "sdelab/measure.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "sdelab/csv.hpp"
#include "sdelab/error.hpp"
#include "sdelab/noise.hpp"

namespace sdelab {

namespace {

std::vector<double> to_soa(std::size_t dim, std::span<const double> points) {
  if (dim == 0) throw std::invalid_argument("measure dimension must be positive");
  if (points.empty() || points.size() % dim != 0)
    throw std::invalid_argument("point array length must be a positive multiple of the dimension");
  const std::size_t n = points.size() / dim;
  std::vector<double> soa(points.size());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 0; d < dim; ++d) {
      const double v = points[i * dim + d];
      if (!std::isfinite(v)) throw std::invalid_argument("measure atoms must be finite");
      soa[d * n + i] = v;
    }
  return soa;
}

}  // namespace

DiscreteMeasure DiscreteMeasure::uniform(std::size_t dim, std::span<const double> points) {
  DiscreteMeasure m;
  m.soa_ = to_soa(dim, points);
  m.dim_ = dim;
  m.size_ = points.size() / dim;
  return m;
}

DiscreteMeasure DiscreteMeasure::weighted(std::size_t dim, std::span<const double> points,
                                          std::vector<Exact> weights) {
  DiscreteMeasure m;
  m.soa_ = to_soa(dim, points);
  m.dim_ = dim;
  m.size_ = points.size() / dim;
  if (weights.size() != m.size_) throw std::invalid_argument("one weight per atom required");
  Exact total = 0;
  for (const Exact& w : weights) {
    if (w <= 0) throw std::invalid_argument("measure weights must be positive");
    total += w;
  }
  if (total != 1) throw std::invalid_argument("measure weights must sum to exactly 1");
  m.weights_ = std::move(weights);
  return m;
}

void DiscreteMeasure::point(std::size_t atom, std::span<double> out) const {
  for (std::size_t d = 0; d < dim_; ++d) out[d] = soa_[d * size_ + atom];
}

Exact DiscreteMeasure::weight(std::size_t atom) const {
  if (weights_.empty()) return Exact(1, static_cast<long long>(size_));
  return weights_[atom];
}

double DiscreteMeasure::weight_double(std::size_t atom) const {
  if (weights_.empty()) return 1.0 / static_cast<double>(size_);
  return to_double(weights_[atom]);
}

std::vector<Exact> DiscreteMeasure::weights() const {
  if (!weights_.empty()) return weights_;
  return std::vector<Exact>(size_, Exact(1, static_cast<long long>(size_)));
}

DiscreteMeasure DiscreteMeasure::select(std::span<const std::size_t> indices) const {
  std::vector<double> pts(indices.size() * dim_);
  for (std::size_t k = 0; k < indices.size(); ++k)
    for (std::size_t d = 0; d < dim_; ++d) pts[k * dim_ + d] = coord(indices[k], d);
  return uniform(dim_, pts);
}

DiscreteMeasure DiscreteMeasure::subsample(std::size_t budget, std::uint64_t seed) const {
  if (!is_uniform()) throw std::invalid_argument("subsampling requires an equal-weight measure");
  if (budget == 0) throw std::invalid_argument("subsample budget must be positive");
  if (size_ <= budget) return *this;
  // Partial Fisher-Yates driven by a counter-based stream.
  std::vector<std::size_t> idx(size_);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  const NoiseStream stream(seed, 0);
  for (std::size_t i = 0; i < budget; ++i) {
    const double u = stream.uniform(0, static_cast<std::uint32_t>(i));
    const std::size_t span = size_ - i;
    const std::size_t j = i + std::min(span - 1, static_cast<std::size_t>(u * static_cast<double>(span)));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(budget);
  std::sort(idx.begin(), idx.end());
  return select(idx);
}

std::string format_real(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

DiscreteMeasure read_measure_csv(const std::string& path) {
  const CsvTable table = read_csv(path);
  std::size_t dim = 0;
  bool has_weight = false;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    const std::string& h = table.header[c];
    if (h == "weight" && c + 1 == table.header.size()) {
      has_weight = true;
    } else if (h == "x" + std::to_string(c + 1)) {
      ++dim;
    } else {
      throw Error(path + ": unexpected column '" + h + "'");
    }
  }
  if (dim == 0) throw Error(path + ": no coordinate columns");
  if (table.rows.empty()) throw Error(path + ": no atoms");
  std::vector<double> pts;
  std::vector<Exact> weights;
  pts.reserve(table.rows.size() * dim);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    for (std::size_t d = 0; d < dim; ++d) pts.push_back(parse_real(row[d], path, r + 2));
    if (has_weight) weights.push_back(parse_exact(row[dim]));
  }
  try {
    if (has_weight) return DiscreteMeasure::weighted(dim, pts, std::move(weights));
    return DiscreteMeasure::uniform(dim, pts);
  } catch (const std::invalid_argument& e) {
    throw Error(path + ": " + e.what());
  }
}

void write_measure_csv(const std::string& path, const DiscreteMeasure& m) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  for (std::size_t d = 0; d < m.dim(); ++d) out << (d ? "," : "") << 'x' << d + 1;
  if (!m.is_uniform()) out << ",weight";
  out << '\n';
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t d = 0; d < m.dim(); ++d) out << (d ? "," : "") << format_real(m.coord(i, d));
    if (!m.is_uniform()) out << ',' << format_exact(m.weight(i));
    out << '\n';
  }
  if (!out) throw Error("write failed for " + path);
}

}  // namespace sdelab
