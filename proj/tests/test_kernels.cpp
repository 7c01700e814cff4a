#include <cmath>
#include <cstring>
#include <vector>

#include "doctest.h"
#include "sdelab/kernels.hpp"
#include "sdelab/noise.hpp"

using namespace sdelab;

namespace {

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

std::vector<double> random_doubles(std::size_t n, std::uint64_t seed, double scale) {
  const NoiseStream s(seed, 0);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = scale * (2.0 * s.uniform(0, static_cast<std::uint32_t>(i)) - 1.0);
  return out;
}

}  // namespace

TEST_CASE("kernel selection honours availability") {
  const auto& active = kernels::active();
  CHECK(active.name != nullptr);
  if (kernels::avx2() == nullptr) CHECK(std::strcmp(active.name, "scalar") == 0);
}

TEST_CASE("simd kernels match the scalar reference bitwise") {
  const kernels::KernelSet* simd = kernels::avx2();
  if (simd == nullptr) {
    MESSAGE("no AVX2 kernels on this machine; equivalence check skipped");
    return;
  }
  const auto& ref = kernels::scalar();

  for (std::size_t count : {1u, 3u, 8u, 13u, 64u, 1001u}) {
    CAPTURE(count);
    {
      std::vector<std::uint32_t> c(4 * count), o1(4 * count), o2(4 * count);
      for (std::size_t i = 0; i < c.size(); ++i) c[i] = static_cast<std::uint32_t>(i * 2654435761u + 17);
      const std::uint32_t* cp[4] = {c.data(), c.data() + count, c.data() + 2 * count, c.data() + 3 * count};
      std::uint32_t* p1[4] = {o1.data(), o1.data() + count, o1.data() + 2 * count, o1.data() + 3 * count};
      std::uint32_t* p2[4] = {o2.data(), o2.data() + count, o2.data() + 2 * count, o2.data() + 3 * count};
      ref.philox(cp, p1, count, 0xdeadbeef, 0x12345678);
      simd->philox(cp, p2, count, 0xdeadbeef, 0x12345678);
      CHECK(o1 == o2);
      CHECK(PhiloxBlock{o1[0], o1[count], o1[2 * count], o1[3 * count]} ==
            philox4x32_10({c[0], c[count], c[2 * count], c[3 * count]}, {0xdeadbeef, 0x12345678}));
    }
    {
      auto x1 = random_doubles(count, 1, 3.0), x2 = x1;
      const auto noise = random_doubles(count, 2, 2.0);
      const kernels::AffineStep1D c{0.3, -1.1, 1.4142135623730951, 0.2, 0.015625, 0.125};
      ref.affine_em_step(x1.data(), noise.data(), count, c);
      simd->affine_em_step(x2.data(), noise.data(), count, c);
      CHECK(same_bits(x1, x2));
    }
    {
      for (std::size_t dim : {1u, 2u, 3u}) {
        const auto soa = random_doubles(count * dim, 3 + dim, 5.0);
        const auto pt = random_doubles(dim, 9, 5.0);
        std::vector<double> d1(count), d2(count);
        ref.distances(pt.data(), soa.data(), count, count, dim, d1.data());
        simd->distances(pt.data(), soa.data(), count, count, dim, d2.data());
        CHECK(same_bits(d1, d2));
      }
    }
    {
      const auto cost = random_doubles(count, 4, 10.0);
      const auto pot = random_doubles(count, 5, 1.0);
      std::vector<std::uint8_t> done(count);
      for (std::size_t i = 0; i < count; ++i) done[i] = (i * 7) % 5 == 0;
      std::vector<double> d1(count, 1.5), d2(count, 1.5);
      std::vector<std::int32_t> p1(count, -1), p2(count, -1);
      ref.relax(0.25, cost.data(), pot.data(), done.data(), count, d1.data(), p1.data(), 4);
      simd->relax(0.25, cost.data(), pot.data(), done.data(), count, d2.data(), p2.data(), 4);
      CHECK(same_bits(d1, d2));
      CHECK(p1 == p2);
      CHECK(ref.argmin(d1.data(), done.data(), count) == simd->argmin(d1.data(), done.data(), count));
      std::vector<double> ties(count, 2.0);
      CHECK(ref.argmin(ties.data(), done.data(), count) == simd->argmin(ties.data(), done.data(), count));
      std::vector<std::uint8_t> all(count, 1);
      CHECK(simd->argmin(ties.data(), all.data(), count) == count);
    }
    {
      const auto a = random_doubles(count, 6, 4.0), b = random_doubles(count, 7, 4.0);
      const double s1 = ref.abs_diff_sum(a.data(), b.data(), count);
      const double s2 = simd->abs_diff_sum(a.data(), b.data(), count);
      CHECK(std::memcmp(&s1, &s2, sizeof s1) == 0);
    }
  }
}
