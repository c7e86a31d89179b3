#include <gtest/gtest.h>

#include <numeric>
#include <vector>

#include "fvl/common/random.hpp"

using fvl::Rng;

// Reference values from an independent implementation of the documented
// algorithm (docs/random.md).

TEST(Rng, KnownStreams) {
  Rng zero(0);
  for (std::uint64_t want : {0x99ec5f36cb75f2b4ULL, 0xbf6e1f784956452aULL, 0x1a5f849d4933e6e0ULL, 0x6aa594f1262d2d2cULL}) {
    EXPECT_EQ(zero.next(), want);
  }
  Rng answer(42);
  for (std::uint64_t want : {0x15780b2e0c2ec716ULL, 0x6104d9866d113a7eULL, 0xae17533239e499a1ULL, 0xecb8ad4703b360a1ULL}) {
    EXPECT_EQ(answer.next(), want);
  }
  EXPECT_EQ(Rng(42).uniform(), 0.08386297105988216);
}

TEST(Rng, BelowAndShuffle) {
  Rng rng(7);
  std::vector<std::uint64_t> draws;
  for (int i = 0; i < 8; ++i) draws.push_back(rng.below(10));
  EXPECT_EQ(draws, (std::vector<std::uint64_t>{2, 6, 0, 8, 9, 4, 0, 3}));

  std::vector<int> items(6);
  std::iota(items.begin(), items.end(), 0);
  Rng(4).shuffle(std::span(items));
  EXPECT_EQ(items, (std::vector<int>{0, 1, 5, 2, 4, 3}));
}

TEST(Rng, NormalMoments) {
  Rng rng(5);
  double sum = 0.0;
  double sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal(2.0, 3.0);
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  EXPECT_NEAR(mean, 2.0, 0.03);
  EXPECT_NEAR(sq / n - mean * mean, 9.0, 0.1);
}
