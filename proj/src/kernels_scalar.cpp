#include <cmath>
#include <cstdlib>
#include <cstring>

#include "sdelab/kernels.hpp"
#include "sdelab/noise.hpp"

namespace sdelab::kernels {

namespace {

void philox_scalar(const std::uint32_t* const ctr[4], std::uint32_t* const out[4], std::size_t count,
                   std::uint32_t key0, std::uint32_t key1) {
  for (std::size_t i = 0; i < count; ++i) {
    const PhiloxBlock r = philox4x32_10({ctr[0][i], ctr[1][i], ctr[2][i], ctr[3][i]}, {key0, key1});
    for (int w = 0; w < 4; ++w) out[w][i] = r[w];
  }
}

void affine_em_step_scalar(double* x, const double* noise, std::size_t count, const AffineStep1D& c) {
  for (std::size_t i = 0; i < count; ++i) {
    const double a = c.drift0 + c.drift1 * x[i];
    const double s = c.diffusion0 + c.diffusion1 * x[i];
    double delta = a * c.dt;
    delta = delta + s * (c.sqrt_dt * noise[i]);
    x[i] = x[i] + delta;
  }
}

void distances_scalar(const double* point, const double* soa, std::size_t stride, std::size_t count,
                      std::size_t dim, double* out) {
  if (dim == 1) {
    for (std::size_t j = 0; j < count; ++j) out[j] = std::fabs(point[0] - soa[j]);
    return;
  }
  for (std::size_t j = 0; j < count; ++j) {
    double acc = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
      const double diff = point[d] - soa[d * stride + j];
      acc = acc + diff * diff;
    }
    out[j] = std::sqrt(acc);
  }
}

void relax_scalar(double base, const double* cost, const double* potential, const std::uint8_t* done,
                  std::size_t count, double* dist, std::int32_t* parent, std::int32_t source) {
  for (std::size_t j = 0; j < count; ++j) {
    const double cand = (base + cost[j]) - potential[j];
    if (!done[j] && cand < dist[j]) {
      dist[j] = cand;
      parent[j] = source;
    }
  }
}

std::size_t argmin_scalar(const double* values, const std::uint8_t* done, std::size_t count) {
  std::size_t best = count;
  for (std::size_t j = 0; j < count; ++j)
    if (!done[j] && (best == count || values[j] < values[best])) best = j;
  return best;
}

double abs_diff_sum_scalar(const double* a, const double* b, std::size_t count) {
  double s[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= count; i += 4)
    for (int l = 0; l < 4; ++l) s[l] = s[l] + std::fabs(a[i + l] - b[i + l]);
  double total = (s[0] + s[1]) + (s[2] + s[3]);
  for (; i < count; ++i) total = total + std::fabs(a[i] - b[i]);
  return total;
}

constexpr KernelSet kScalar{
    "scalar",          philox_scalar, affine_em_step_scalar, distances_scalar, relax_scalar,
    argmin_scalar,     abs_diff_sum_scalar,
};

}  // namespace

const KernelSet& scalar() { return kScalar; }

#ifndef SDELAB_HAVE_AVX2
const KernelSet* avx2() { return nullptr; }
#endif

const KernelSet& active() {
  static const KernelSet* chosen = [] {
    const char* env = std::getenv("SDELAB_SIMD");
    if (env != nullptr && std::strcmp(env, "scalar") == 0) return &kScalar;
    const KernelSet* simd = avx2();
    return simd != nullptr ? simd : &kScalar;
  }();
  return *chosen;
}

}  // namespace sdelab::kernels
