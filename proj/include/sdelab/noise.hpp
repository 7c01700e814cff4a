#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

namespace sdelab {

using PhiloxBlock = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

inline constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
inline constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

/// Philox4x32 with 10 rounds (Salmon et al., Random123).
constexpr PhiloxBlock philox4x32_10(PhiloxBlock ctr, PhiloxKey key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kPhiloxW0;
      key[1] += kPhiloxW1;
    }
    const std::uint64_t p0 = std::uint64_t{kPhiloxM0} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{kPhiloxM1} * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
  }
  return ctr;
}

/// Law of the per-step noise vector of a scheme.
enum class NoiseKind {
  gaussian,       // standard normal components
  rademacher,     // independent +-1 with probability 1/2
  gaussian_sign,  // sign of a standard normal draw (Rademacher in law)
};

const char* to_string(NoiseKind kind);

/// Number of Philox blocks consumed per step for a q-component draw.
std::size_t blocks_per_draw(NoiseKind kind, std::size_t components);

/// Uniform on the open interval (0, 1) from 64 random bits.
inline double uniform_open(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = (std::uint64_t{hi} << 32 | lo) >> 12;
  return (static_cast<double>(bits) + 0.5) * 0x1p-52;
}

/// Two standard normals from one block (Box-Muller).
void box_muller(const PhiloxBlock& block, double& z0, double& z1);

/// Fills `out` from consecutive blocks (blocks.size() == blocks_per_draw).
void noise_from_blocks(NoiseKind kind, std::span<const PhiloxBlock> blocks, std::span<double> out);

/// splitmix64 finalizer applied to (seed, tag); used to derive child seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

/// Counter-based stream keyed by (seed, stream id). A draw is addressed by
/// (step, block); no state is carried between draws, so any evaluation order
/// reproduces the same numbers.
class NoiseStream {
 public:
  NoiseStream(std::uint64_t seed, std::uint64_t stream) noexcept
      : seed_(seed), stream_(stream) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  PhiloxKey key() const noexcept {
    return {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)};
  }

  PhiloxBlock block(std::uint32_t step, std::uint32_t index) const noexcept {
    return philox4x32_10({index, step, static_cast<std::uint32_t>(stream_),
                          static_cast<std::uint32_t>(stream_ >> 32)},
                         key());
  }

  /// Noise vector for one step; out.size() is the component count.
  void draw(NoiseKind kind, std::uint32_t step, std::span<double> out) const;

  /// Uniform (0,1) variate addressed by (step, index).
  double uniform(std::uint32_t step, std::uint32_t index) const noexcept {
    const PhiloxBlock b = block(step, index);
    return uniform_open(b[0], b[1]);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
};

}  // namespace sdelab
