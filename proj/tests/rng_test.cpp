#include <gtest/gtest.h>

#include <set>

#include "ymimo/rng.hpp"

namespace ymimo {
namespace {

TEST(Philox, KnownAnswerVectors) {
  EXPECT_EQ(philox4x32_10({0, 0, 0, 0}, {0, 0}),
            (PhiloxBlock{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
  EXPECT_EQ(philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}),
            (PhiloxBlock{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
  EXPECT_EQ(philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}),
            (PhiloxBlock{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(CounterRng, FirstBlockMatchesRawGenerator) {
  CounterRng rng(0, 0);
  EXPECT_EQ(rng.next_u32(), 0x6627e8d5u);
  EXPECT_EQ(rng.next_u32(), 0xe169c58du);
  EXPECT_EQ(rng.next_u32(), 0xbc57ac4cu);
  EXPECT_EQ(rng.next_u32(), 0x9b00dbd8u);
  EXPECT_EQ(rng.blocks_consumed(), 1u);
  rng.next_u32();
  EXPECT_EQ(rng.blocks_consumed(), 2u);
}

TEST(CounterRng, SameSeedAndStreamReproduce) {
  CounterRng a(42, stream_id(StreamTag::kSymbols, 1, 2));
  CounterRng b(42, stream_id(StreamTag::kSymbols, 1, 2));
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.complex_normal(), b.complex_normal());
}

TEST(CounterRng, StreamsAndSeedsDiffer) {
  CounterRng a(42, stream_id(StreamTag::kSymbols, 1, 2));
  CounterRng b(42, stream_id(StreamTag::kSymbols, 2, 1));
  CounterRng c(43, stream_id(StreamTag::kSymbols, 1, 2));
  const auto x = a.next_u32();
  EXPECT_NE(x, b.next_u32());
  EXPECT_NE(x, c.next_u32());
}

TEST(CounterRng, UniformStrictlyInsideUnitInterval) {
  CounterRng rng(7, 0);
  double sum = 0.0;
  constexpr int kDraws = 100000;
  for (int i = 0; i < kDraws; ++i) {
    const double u = rng.uniform01();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  // Mean 1/2, sd of the mean sqrt(1/12 / n).
  EXPECT_NEAR(sum / kDraws, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / kDraws));
}

TEST(CounterRng, ComplexNormalMoments) {
  CounterRng rng(11, 0);
  constexpr int kDraws = 100000;
  double re2 = 0.0, im2 = 0.0, cross = 0.0;
  for (int i = 0; i < kDraws; ++i) {
    const auto z = rng.complex_normal();
    re2 += z.real() * z.real();
    im2 += z.imag() * z.imag();
    cross += z.real() * z.imag();
  }
  EXPECT_NEAR(re2 / kDraws, 0.5, 0.025);
  EXPECT_NEAR(im2 / kDraws, 0.5, 0.025);
  EXPECT_NEAR(cross / kDraws, 0.0, 0.01);
}

TEST(StreamId, PacksTagAndIndices) {
  EXPECT_EQ(stream_id(StreamTag::kUserNoise, 3, 2), (5ULL << 48) | (3ULL << 24) | 2ULL);
  EXPECT_EQ(stream_id(StreamTag::kAwgn, 0x1ffffff, 0), (6ULL << 48) | (0xffffffULL << 24));
}

TEST(DeriveSeed, DeterministicAndDistinct) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    EXPECT_EQ(derive_seed(9, i), derive_seed(9, i));
    seen.insert(derive_seed(9, i));
  }
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_NE(derive_seed(9, 0), derive_seed(10, 0));
}

}  // namespace
}  // namespace ymimo
