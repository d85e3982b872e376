#pragma once

#include <cstdint>
#include <random>

namespace unav {

// Unbiased draw in [0, n) via rejection sampling. std::uniform_int_distribution
// is implementation-defined, mt19937 output is not; this keeps generated
// scenarios bit-identical across toolchains.
inline std::uint32_t bounded_draw(std::mt19937& gen, std::uint32_t n) {
  std::uint64_t limit = (std::uint64_t{1} << 32) / n * n;
  std::uint32_t v;
  do {
    v = gen();
  } while (v >= limit);
  return v % n;
}

}  // namespace unav
