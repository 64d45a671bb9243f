#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace stochak {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
// Stateless: each 128-bit counter + 64-bit key maps to 128 random bits,
// so draws indexed by (path, stream, step) are reproducible no matter how
// work is split across threads.
namespace philox {

inline void mul_hi_lo(uint32_t a, uint32_t b, uint32_t& hi, uint32_t& lo) {
  const uint64_t p = static_cast<uint64_t>(a) * b;
  hi = static_cast<uint32_t>(p >> 32);
  lo = static_cast<uint32_t>(p);
}

inline std::array<uint32_t, 4> block(std::array<uint32_t, 2> key,
                                     std::array<uint32_t, 4> ctr) {
  constexpr uint32_t kWeylA = 0x9E3779B9u;
  constexpr uint32_t kWeylB = 0xBB67AE85u;
  constexpr uint32_t kMulA = 0xD2511F53u;
  constexpr uint32_t kMulB = 0xCD9E8D57u;
  for (int round = 0; round < 10; ++round) {
    uint32_t hi0, lo0, hi1, lo1;
    mul_hi_lo(kMulA, ctr[0], hi0, lo0);
    mul_hi_lo(kMulB, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeylA;
    key[1] += kWeylB;
  }
  return ctr;
}

}  // namespace philox

// Standard normal draws addressed by (path, stream, step); one Philox block
// per draw, Box-Muller on the first two words.
class NormalStream {
 public:
  explicit NormalStream(uint64_t seed)
      : key_{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32)} {}

  double normal(uint64_t path, uint32_t stream, uint64_t step) const {
    const auto r = philox::block(
        key_, {static_cast<uint32_t>(step), static_cast<uint32_t>(step >> 32),
               static_cast<uint32_t>(path),
               static_cast<uint32_t>(path >> 32) ^ stream});
    // u1 in (0,1], u2 in (0,1)
    const double u1 = (static_cast<double>(r[0]) + 1.0) * 0x1p-32;
    const double u2 = (static_cast<double>(r[1]) + 0.5) * 0x1p-32;
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  // Uniform in [0,1) for the same addressing scheme.
  double uniform(uint64_t path, uint32_t stream, uint64_t step) const {
    const auto r = philox::block(
        key_, {static_cast<uint32_t>(step), static_cast<uint32_t>(step >> 32),
               static_cast<uint32_t>(path),
               static_cast<uint32_t>(path >> 32) ^ stream});
    return static_cast<double>(r[0]) * 0x1p-32;
  }

 private:
  std::array<uint32_t, 2> key_;
};

}  // namespace stochak
