#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "causal_cart/rng.hpp"

using ccart::RngStream;

// Known-answer vectors published with the Random123 reference implementation.
TEST(Philox, KnownAnswerZeros) {
  const auto out = RngStream::philox4x32_10({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out[0], 0x6627e8d5u);
  EXPECT_EQ(out[1], 0xe169c58du);
  EXPECT_EQ(out[2], 0xbc57ac4cu);
  EXPECT_EQ(out[3], 0x9b00dbd8u);
}

TEST(Philox, KnownAnswerOnes) {
  const auto out = RngStream::philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                            {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(out[0], 0x408f276du);
  EXPECT_EQ(out[1], 0x41c83b0eu);
  EXPECT_EQ(out[2], 0xa20bc7c6u);
  EXPECT_EQ(out[3], 0x6d5451fdu);
}

TEST(Philox, KnownAnswerPi) {
  const auto out = RngStream::philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                            {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(out[0], 0xd16cfe09u);
  EXPECT_EQ(out[1], 0x94fdccebu);
  EXPECT_EQ(out[2], 0x5001e420u);
  EXPECT_EQ(out[3], 0x24126ea1u);
}

TEST(RngStream, ReplayIsIdentical) {
  RngStream a(42, "exp", 7), b(42, "exp", 7);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a(), b());
}

TEST(RngStream, DistinctCoordinatesGiveDistinctStreams) {
  std::set<std::uint64_t> firsts;
  for (std::uint64_t seed : {1ull, 2ull})
    for (const char* id : {"a", "b"})
      for (std::uint64_t rep : {0ull, 1ull})
        for (std::uint32_t lane : {0u, 1u}) firsts.insert(RngStream(seed, id, rep, lane)());
  EXPECT_EQ(firsts.size(), 16u);
}

TEST(RngStream, SubstreamMatchesDirectConstruction) {
  RngStream base(9, "id", 3, 0);
  base();  // consumption of the parent does not leak into the substream
  RngStream sub = base.substream(5);
  RngStream direct(9, "id", 3, 5);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(sub(), direct());
}

TEST(RngStream, Uniform01StaysInUnitInterval) {
  RngStream s(1, "u", 0);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  // mean of U(0,1): sd of the average is 1/sqrt(12 n)
  EXPECT_NEAR(sum / n, 0.5, 5.0 / std::sqrt(12.0 * n));
}
