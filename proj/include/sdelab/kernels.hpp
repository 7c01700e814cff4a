#pragma once

// Data-parallel inner loops. Every kernel has a scalar reference; SIMD
// variants must reproduce it bitwise (same operations, same association),
// which the kernel equivalence tests enforce.

#include <cstddef>
#include <cstdint>

namespace sdelab::kernels {

/// Coefficients of one Euler-Maruyama step for a scalar affine SDE
/// dX = (a0 + a1 X) dt + (s0 + s1 X) dW.
struct AffineStep1D {
  double drift0;
  double drift1;
  double diffusion0;
  double diffusion1;
  double dt;
  double sqrt_dt;
};

struct KernelSet {
  const char* name;

  /// Philox4x32-10 over `count` lanes; ctr/out are four SoA word arrays.
  void (*philox)(const std::uint32_t* const ctr[4], std::uint32_t* const out[4], std::size_t count,
                 std::uint32_t key0, std::uint32_t key1);

  /// x[i] += (a0 + a1 x) dt + (s0 + s1 x)(sqrt_dt noise[i]).
  void (*affine_em_step)(double* x, const double* noise, std::size_t count, const AffineStep1D& c);

  /// out[j] = |point - atom_j|. `soa` holds `dim` blocks of `stride` doubles.
  /// In one dimension this is fabs(point - x_j); otherwise sqrt of the sum of
  /// squares accumulated in coordinate order.
  void (*distances)(const double* point, const double* soa, std::size_t stride, std::size_t count,
                    std::size_t dim, double* out);

  /// Dense Dijkstra relaxation: cand = base + cost[j] - potential[j]; for
  /// j with !done[j] and cand < dist[j], set dist[j] = cand, parent[j] = source.
  void (*relax)(double base, const double* cost, const double* potential, const std::uint8_t* done,
                std::size_t count, double* dist, std::int32_t* parent, std::int32_t source);

  /// First index of the minimum over entries with !done[j]; count if none.
  std::size_t (*argmin)(const double* values, const std::uint8_t* done, std::size_t count);

  /// Sum of |a_i - b_i| with four interleaved partial sums combined as
  /// (s0 + s1) + (s2 + s3), then the remainder added in order.
  double (*abs_diff_sum)(const double* a, const double* b, std::size_t count);
};

const KernelSet& scalar();

/// AVX2 kernels, or nullptr when not compiled in or not supported by the CPU.
const KernelSet* avx2();

/// Kernels used by the library: AVX2 when available unless the environment
/// variable SDELAB_SIMD is set to "scalar".
const KernelSet& active();

}  // namespace sdelab::kernels
