// Compiled with -mavx2; entered only after a runtime CPU check.

#include <immintrin.h>

#include <cmath>
#include <limits>

#include "sdelab/kernels.hpp"
#include "sdelab/noise.hpp"

namespace sdelab::kernels {

namespace {

inline void mulhilo8(__m256i a, __m256i m, __m256i& hi, __m256i& lo) {
  const __m256i even = _mm256_mul_epu32(a, m);
  const __m256i odd = _mm256_mul_epu32(_mm256_srli_epi64(a, 32), m);
  lo = _mm256_blend_epi32(even, _mm256_slli_epi64(odd, 32), 0b10101010);
  hi = _mm256_blend_epi32(_mm256_srli_epi64(even, 32), odd, 0b10101010);
}

void philox_avx2(const std::uint32_t* const ctr[4], std::uint32_t* const out[4], std::size_t count,
                 std::uint32_t key0, std::uint32_t key1) {
  const __m256i m0 = _mm256_set1_epi32(static_cast<int>(kPhiloxM0));
  const __m256i m1 = _mm256_set1_epi32(static_cast<int>(kPhiloxM1));
  std::size_t i = 0;
  for (; i + 8 <= count; i += 8) {
    __m256i c0 = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(ctr[0] + i));
    __m256i c1 = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(ctr[1] + i));
    __m256i c2 = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(ctr[2] + i));
    __m256i c3 = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(ctr[3] + i));
    std::uint32_t k0 = key0, k1 = key1;
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        k0 += kPhiloxW0;
        k1 += kPhiloxW1;
      }
      __m256i hi0, lo0, hi1, lo1;
      mulhilo8(c0, m0, hi0, lo0);
      mulhilo8(c2, m1, hi1, lo1);
      const __m256i n0 = _mm256_xor_si256(_mm256_xor_si256(hi1, c1), _mm256_set1_epi32(static_cast<int>(k0)));
      const __m256i n2 = _mm256_xor_si256(_mm256_xor_si256(hi0, c3), _mm256_set1_epi32(static_cast<int>(k1)));
      c0 = n0;
      c1 = lo1;
      c2 = n2;
      c3 = lo0;
    }
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(out[0] + i), c0);
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(out[1] + i), c1);
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(out[2] + i), c2);
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(out[3] + i), c3);
  }
  for (; i < count; ++i) {
    const PhiloxBlock r = philox4x32_10({ctr[0][i], ctr[1][i], ctr[2][i], ctr[3][i]}, {key0, key1});
    for (int w = 0; w < 4; ++w) out[w][i] = r[w];
  }
}

void affine_em_step_avx2(double* x, const double* noise, std::size_t count, const AffineStep1D& c) {
  const __m256d a0 = _mm256_set1_pd(c.drift0), a1 = _mm256_set1_pd(c.drift1);
  const __m256d s0 = _mm256_set1_pd(c.diffusion0), s1 = _mm256_set1_pd(c.diffusion1);
  const __m256d dt = _mm256_set1_pd(c.dt), sq = _mm256_set1_pd(c.sqrt_dt);
  std::size_t i = 0;
  for (; i + 4 <= count; i += 4) {
    const __m256d xv = _mm256_loadu_pd(x + i);
    const __m256d nv = _mm256_loadu_pd(noise + i);
    const __m256d a = _mm256_add_pd(a0, _mm256_mul_pd(a1, xv));
    const __m256d s = _mm256_add_pd(s0, _mm256_mul_pd(s1, xv));
    __m256d delta = _mm256_mul_pd(a, dt);
    delta = _mm256_add_pd(delta, _mm256_mul_pd(s, _mm256_mul_pd(sq, nv)));
    _mm256_storeu_pd(x + i, _mm256_add_pd(xv, delta));
  }
  for (; i < count; ++i) {
    const double a = c.drift0 + c.drift1 * x[i];
    const double s = c.diffusion0 + c.diffusion1 * x[i];
    double delta = a * c.dt;
    delta = delta + s * (c.sqrt_dt * noise[i]);
    x[i] = x[i] + delta;
  }
}

inline __m256d abs4(__m256d v) { return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v); }

void distances_avx2(const double* point, const double* soa, std::size_t stride, std::size_t count,
                    std::size_t dim, double* out) {
  std::size_t j = 0;
  if (dim == 1) {
    const __m256d p = _mm256_set1_pd(point[0]);
    for (; j + 4 <= count; j += 4)
      _mm256_storeu_pd(out + j, abs4(_mm256_sub_pd(p, _mm256_loadu_pd(soa + j))));
    for (; j < count; ++j) out[j] = std::fabs(point[0] - soa[j]);
    return;
  }
  for (; j + 4 <= count; j += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t d = 0; d < dim; ++d) {
      const __m256d diff = _mm256_sub_pd(_mm256_set1_pd(point[d]), _mm256_loadu_pd(soa + d * stride + j));
      acc = _mm256_add_pd(acc, _mm256_mul_pd(diff, diff));
    }
    _mm256_storeu_pd(out + j, _mm256_sqrt_pd(acc));
  }
  for (; j < count; ++j) {
    double acc = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
      const double diff = point[d] - soa[d * stride + j];
      acc = acc + diff * diff;
    }
    out[j] = std::sqrt(acc);
  }
}

inline __m256d not_done_mask(const std::uint8_t* done) {
  int packed;
  __builtin_memcpy(&packed, done, 4);
  const __m256i lanes = _mm256_cvtepu8_epi64(_mm_cvtsi32_si128(packed));
  return _mm256_castsi256_pd(_mm256_cmpeq_epi64(lanes, _mm256_setzero_si256()));
}

void relax_avx2(double base, const double* cost, const double* potential, const std::uint8_t* done,
                std::size_t count, double* dist, std::int32_t* parent, std::int32_t source) {
  const __m256d b = _mm256_set1_pd(base);
  const __m128i src = _mm_set1_epi32(source);
  const __m256i pack = _mm256_setr_epi32(0, 2, 4, 6, 0, 2, 4, 6);
  std::size_t j = 0;
  for (; j + 4 <= count; j += 4) {
    const __m256d cand = _mm256_sub_pd(_mm256_add_pd(b, _mm256_loadu_pd(cost + j)), _mm256_loadu_pd(potential + j));
    const __m256d cur = _mm256_loadu_pd(dist + j);
    const __m256d take = _mm256_and_pd(not_done_mask(done + j), _mm256_cmp_pd(cand, cur, _CMP_LT_OQ));
    if (_mm256_movemask_pd(take) == 0) continue;
    _mm256_storeu_pd(dist + j, _mm256_blendv_pd(cur, cand, take));
    const __m128i m32 = _mm256_castsi256_si128(_mm256_permutevar8x32_epi32(_mm256_castpd_si256(take), pack));
    _mm_maskstore_epi32(reinterpret_cast<int*>(parent + j), m32, src);
  }
  for (; j < count; ++j) {
    const double cand = (base + cost[j]) - potential[j];
    if (!done[j] && cand < dist[j]) {
      dist[j] = cand;
      parent[j] = source;
    }
  }
}

std::size_t argmin_avx2(const double* values, const std::uint8_t* done, std::size_t count) {
  const __m256d inf = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  __m256d best = inf;
  std::size_t j = 0;
  for (; j + 4 <= count; j += 4)
    best = _mm256_min_pd(best, _mm256_blendv_pd(inf, _mm256_loadu_pd(values + j), not_done_mask(done + j)));
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, best);
  double m = std::fmin(std::fmin(lanes[0], lanes[1]), std::fmin(lanes[2], lanes[3]));
  for (; j < count; ++j)
    if (!done[j] && values[j] < m) m = values[j];
  for (std::size_t k = 0; k < count; ++k)
    if (!done[k] && values[k] == m) return k;
  return count;
}

double abs_diff_sum_avx2(const double* a, const double* b, std::size_t count) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= count; i += 4)
    acc = _mm256_add_pd(acc, abs4(_mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i))));
  alignas(32) double s[4];
  _mm256_store_pd(s, acc);
  double total = (s[0] + s[1]) + (s[2] + s[3]);
  for (; i < count; ++i) total = total + std::fabs(a[i] - b[i]);
  return total;
}

constexpr KernelSet kAvx2{
    "avx2",        philox_avx2, affine_em_step_avx2, distances_avx2, relax_avx2,
    argmin_avx2,   abs_diff_sum_avx2,
};

}  // namespace

const KernelSet* avx2() {
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &kAvx2 : nullptr;
}

}  // namespace sdelab::kernels
