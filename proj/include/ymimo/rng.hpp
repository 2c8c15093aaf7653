#pragma once

// Counter-based random streams.
//
// Generator: Philox4x32-10 (Salmon et al., "Parallel random numbers: as easy
// as 1, 2, 3", SC'11). A stream is addressed by (seed, stream id):
//   key     = (seed & 0xffffffff, seed >> 32)
//   counter = (block & 0xffffffff, block >> 32, stream & 0xffffffff, stream >> 32)
// Each block yields four 32-bit words, consumed in order. Any language that
// implements Philox4x32-10 reproduces these streams bit for bit.
//
// Derived quantities (documented so they are reproducible, not just stable):
//   uniform01   = ((w0 >> 5) * 2^26 + (w1 >> 6) + 0.5) / 2^53, strictly inside (0, 1)
//   complex CN(0, 1) sample: four consecutive words, u1 from the first pair,
//                u2 from the second,
//                r = sqrt(-2 ln u1), theta = 2 pi u2,
//                z = (r cos theta + i r sin theta) / sqrt(2)

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace ymimo {

inline constexpr const char* kRngName = "philox4x32-10/v1";

namespace detail {

inline constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
inline constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

}  // namespace detail

using PhiloxBlock = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

inline PhiloxBlock philox4x32_10(PhiloxBlock ctr, PhiloxKey key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += detail::kPhiloxW0;
      key[1] += detail::kPhiloxW1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    detail::mulhilo(detail::kPhiloxM0, ctr[0], hi0, lo0);
    detail::mulhilo(detail::kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

// Stream ids pack a purpose tag with two indices: tag << 48 | a << 24 | b.
enum class StreamTag : std::uint16_t {
  kUplinkChannel = 1,    // a = attempt, b = user
  kDownlinkChannel = 2,  // a = attempt, b = user
  kSymbols = 3,          // a = sender, b = receiver
  kRelayNoise = 4,       // a = channel use, b = 0
  kUserNoise = 5,        // a = channel use, b = user
  kAwgn = 6,             // a = 0, b = 0
  kSeedDerivation = 7,   // a = index >> 24, b = index & 0xffffff
};

constexpr std::uint64_t stream_id(StreamTag tag, std::uint32_t a, std::uint32_t b) {
  return (static_cast<std::uint64_t>(tag) << 48) |
         (static_cast<std::uint64_t>(a & 0xffffffu) << 24) |
         static_cast<std::uint64_t>(b & 0xffffffu);
}

class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  std::uint32_t next_u32() {
    if (used_ == 4) refill();
    return buffer_[used_++];
  }

  double uniform01() {
    const std::uint32_t w0 = next_u32();
    const std::uint32_t w1 = next_u32();
    const double hi = static_cast<double>(w0 >> 5) * 67108864.0;  // 2^26
    return (hi + static_cast<double>(w1 >> 6) + 0.5) / 9007199254740992.0;  // 2^53
  }

  // Unit-variance circularly-symmetric complex Gaussian, E|z|^2 = 1.
  std::complex<double> complex_normal() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(theta) * std::numbers::sqrt2 / 2.0,
            r * std::sin(theta) * std::numbers::sqrt2 / 2.0};
  }

  std::uint64_t blocks_consumed() const noexcept { return block_; }

 private:
  void refill() {
    const PhiloxBlock ctr{static_cast<std::uint32_t>(block_),
                          static_cast<std::uint32_t>(block_ >> 32),
                          static_cast<std::uint32_t>(stream_),
                          static_cast<std::uint32_t>(stream_ >> 32)};
    buffer_ = philox4x32_10(ctr, key_);
    ++block_;
    used_ = 0;
  }

  PhiloxKey key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  PhiloxBlock buffer_{};
  int used_ = 4;
};

// Child seed for trial / sweep-point fan-out: the first two words of the
// seed-derivation stream at the given index.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  CounterRng rng(seed, stream_id(StreamTag::kSeedDerivation,
                                 static_cast<std::uint32_t>(index >> 24),
                                 static_cast<std::uint32_t>(index)));
  const std::uint64_t lo = rng.next_u32();
  const std::uint64_t hi = rng.next_u32();
  return (hi << 32) | lo;
}

}  // namespace ymimo
