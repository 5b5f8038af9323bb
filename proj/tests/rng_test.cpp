// Copyright 2026 The corrprobe Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "corrprobe/parallel.hpp"
#include "corrprobe/rng.hpp"

using namespace corrprobe;

TEST(Rng, SplitmixReferenceSequence) {
  // Published splitmix64 outputs for seed 1234567.
  std::uint64_t s = 1234567;
  EXPECT_EQ(splitmix64(s), 6457827717110365317ULL);
  EXPECT_EQ(splitmix64(s), 3203168211198807973ULL);
  EXPECT_EQ(splitmix64(s), 9817491932198370423ULL);
}

TEST(Rng, StreamsAreDistinctAndStable) {
  EXPECT_EQ(stream_seed(3, 4), stream_seed(3, 4));
  EXPECT_NE(stream_seed(3, 4), stream_seed(3, 5));
  EXPECT_NE(stream_seed(3, 4), stream_seed(4, 4));
}

TEST(Rng, BelowIsInRangeAndRoughlyUniform) {
  Rng rng(1);
  std::vector<int> hist(7, 0);
  for (int i = 0; i < 70000; ++i) ++hist[rng.below(7)];
  for (const int h : hist) EXPECT_NEAR(h, 10000, 500);
}

TEST(Rng, NormalMoments) {
  Rng rng(2);
  double sum = 0, sq = 0;
  const int n = 100000;
  for (int i = 0; i < n / 2; ++i) {
    double a, b;
    rng.normal_pair(a, b);
    sum += a + b;
    sq += a * a + b * b;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.02);
  EXPECT_NEAR(sq / n, 1.0, 0.02);
}

TEST(Rng, ShuffleIsAPermutation) {
  Rng rng(3);
  std::vector<int> v(100);
  std::iota(v.begin(), v.end(), 0);
  rng.shuffle(std::span<int>(v));
  auto sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sorted[i], i);
  EXPECT_FALSE(std::is_sorted(v.begin(), v.end()));
}

TEST(Parallel, SlotsAreFilledAndFirstErrorWins) {
  std::vector<int> out(50, 0);
  parallel_for(out.size(), 4, [&](std::size_t i) { out[i] = static_cast<int>(i * i); });
  for (int i = 0; i < 50; ++i) EXPECT_EQ(out[i], i * i);
  try {
    parallel_for(50, 4, [&](std::size_t i) {
      if (i == 7 || i == 30) throw std::runtime_error(std::to_string(i));
    });
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "7");
  }
}
