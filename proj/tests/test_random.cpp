#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "lilmc/parallel.hpp"
#include "lilmc/random.hpp"

using namespace lilmc;

// Known-answer vectors of the reference Philox4x32-10 implementation.
TEST(Philox, KnownAnswerZero) {
  const auto out = philox4x32_10({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out, (Philox4x32Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
}

TEST(Philox, KnownAnswerAllOnes) {
  const auto out = philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(out, (Philox4x32Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
}

TEST(Philox, KnownAnswerPiDigits) {
  const auto out = philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(out, (Philox4x32Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(RandomStream, ReplaysBitForBit) {
  RandomStream a(42, 7, StreamPurpose::simulate);
  RandomStream b(42, 7, StreamPurpose::simulate);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a(), b());
}

TEST(RandomStream, StreamsDifferByReplicaPurposeAndSeed) {
  RandomStream base(42, 7, StreamPurpose::simulate);
  RandomStream other_replica(42, 8, StreamPurpose::simulate);
  RandomStream other_purpose(42, 7, StreamPurpose::certify);
  RandomStream other_seed(43, 7, StreamPurpose::simulate);
  const auto x = base();
  EXPECT_NE(x, other_replica());
  EXPECT_NE(x, other_purpose());
  EXPECT_NE(x, other_seed());
}

TEST(RandomStream, HighSeedBitsMatter) {
  RandomStream a(1, 0, StreamPurpose::simulate);
  RandomStream b(1 + (std::uint64_t{1} << 40), 0, StreamPurpose::simulate);
  EXPECT_NE(a(), b());
}

TEST(RandomStream, DrawAccounting) {
  RandomStream s(1, 0, StreamPurpose::simulate);
  EXPECT_EQ(s.draws(), 0u);
  s.uniform();
  EXPECT_EQ(s.draws(), 1u);
  s.normal();
  EXPECT_EQ(s.draws(), 3u);
  s.uniform();
  EXPECT_EQ(s.draws(), 4u);
}

TEST(RandomStream, UniformOpenIntervalAndMoments) {
  RandomStream s(3, 0, StreamPurpose::simulate);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sq += u * u;
  }
  EXPECT_NEAR(sum / n, 0.5, 5.0 * std::sqrt(1.0 / 12.0 / n));
  EXPECT_NEAR(sq / n - (sum / n) * (sum / n), 1.0 / 12.0, 2e-3);
}

TEST(RandomStream, NormalMoments) {
  RandomStream s(5, 0, StreamPurpose::control);
  const int n = 200000;
  double sum = 0.0, sq = 0.0, q = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = s.normal();
    sum += z;
    sq += z * z;
    q += z * z * z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 5.0 / std::sqrt(n));
  EXPECT_NEAR(sq / n, 1.0, 5.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(q / n, 3.0, 5.0 * std::sqrt(96.0 / n));
}

TEST(Parallel, ResultsIndependentOfWorkerCount) {
  auto run = [](unsigned threads) {
    std::vector<double> slots(1001);
    parallel_for(slots.size(), threads, [&](std::size_t i) {
      RandomStream s(9, static_cast<std::uint32_t>(i), StreamPurpose::ensemble);
      slots[i] = s.normal();
    });
    return pairwise_sum(slots);
  };
  const double one = run(1);
  EXPECT_EQ(one, run(4));
  EXPECT_EQ(one, run(16));
}

TEST(Parallel, PropagatesExceptions) {
  EXPECT_THROW(parallel_for(100, 4,
                            [](std::size_t i) {
                              if (i == 57) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
}

TEST(Parallel, PairwiseSumMatchesExactSmallIntegers) {
  std::vector<double> xs(12345);
  std::iota(xs.begin(), xs.end(), 1.0);
  EXPECT_EQ(pairwise_sum(xs), 12345.0 * 12346.0 / 2.0);
  EXPECT_EQ(pairwise_sum(std::vector<double>{}), 0.0);
}

TEST(Parallel, DefaultThreadsReadsEnvironment) {
  setenv("LILMC_THREADS", "3", 1);
  EXPECT_EQ(default_threads(), 3u);
  setenv("LILMC_THREADS", "garbage", 1);
  EXPECT_GE(default_threads(), 1u);
  unsetenv("LILMC_THREADS");
}
