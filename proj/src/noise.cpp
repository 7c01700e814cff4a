#include "sdelab/noise.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace sdelab {

const char* to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::gaussian: return "gaussian";
    case NoiseKind::rademacher: return "rademacher";
    case NoiseKind::gaussian_sign: return "gaussian_sign";
  }
  return "?";
}

std::size_t blocks_per_draw(NoiseKind kind, std::size_t components) {
  if (kind == NoiseKind::rademacher) return (components + 127) / 128;
  return (components + 1) / 2;
}

void box_muller(const PhiloxBlock& block, double& z0, double& z1) {
  const double u1 = uniform_open(block[0], block[1]);
  const double u2 = uniform_open(block[2], block[3]);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  z0 = r * std::cos(theta);
  z1 = r * std::sin(theta);
}

void noise_from_blocks(NoiseKind kind, std::span<const PhiloxBlock> blocks, std::span<double> out) {
  if (kind == NoiseKind::rademacher) {
    for (std::size_t r = 0; r < out.size(); ++r) {
      const std::uint32_t word = blocks[r / 128][(r % 128) / 32];
      out[r] = (word >> (r % 32)) & 1u ? 1.0 : -1.0;
    }
    return;
  }
  for (std::size_t r = 0; r < out.size(); r += 2) {
    double z0, z1;
    box_muller(blocks[r / 2], z0, z1);
    out[r] = z0;
    if (r + 1 < out.size()) out[r + 1] = z1;
  }
  if (kind == NoiseKind::gaussian_sign)
    for (double& z : out) z = z >= 0.0 ? 1.0 : -1.0;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (tag + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

void NoiseStream::draw(NoiseKind kind, std::uint32_t step, std::span<double> out) const {
  const std::size_t nblocks = blocks_per_draw(kind, out.size());
  PhiloxBlock local[4];
  std::vector<PhiloxBlock> heap;
  std::span<PhiloxBlock> blocks;
  if (nblocks <= 4) {
    blocks = std::span<PhiloxBlock>(local, nblocks);
  } else {
    heap.resize(nblocks);
    blocks = heap;
  }
  for (std::size_t b = 0; b < nblocks; ++b) blocks[b] = block(step, static_cast<std::uint32_t>(b));
  noise_from_blocks(kind, blocks, out);
}

}  // namespace sdelab
