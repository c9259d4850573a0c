#include <cmath>
#include <cstdint>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <gtest/gtest.h>

#include "noma/parallel.hpp"
#include "noma/random.hpp"

namespace {

using noma::CounterRng;
using noma::Philox4x32;

// Known-answer vectors published with the Random123 reference implementation.
TEST(Philox, KnownAnswers) {
  EXPECT_EQ(Philox4x32::generate({0, 0, 0, 0}, {0, 0}),
            (Philox4x32::Counter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(Philox4x32::generate({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                                 {0xffffffff, 0xffffffff}),
            (Philox4x32::Counter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(Philox4x32::generate({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                                 {0xa4093822, 0x299f31d0}),
            (Philox4x32::Counter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(CounterRng, StreamsAreReproducibleAndDistinct) {
  CounterRng a(7, 3, 1);
  CounterRng b(7, 3, 1);
  CounterRng c(7, 3, 2);
  CounterRng d(7, 4, 1);
  CounterRng e(8, 3, 1);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    EXPECT_NE(x, c.next_u64());
    EXPECT_NE(x, d.next_u64());
    EXPECT_NE(x, e.next_u64());
  }
}

TEST(CounterRng, UniformIsOpenInterval) {
  CounterRng r(1, 0);
  double sum = 0.0;
  constexpr int n = 200'000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / n, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST(CounterRng, ExponentialAndNormalMoments) {
  CounterRng r(2, 0);
  constexpr int n = 1'000'000;
  double se = 0.0;
  double ne = 0.0;
  double ne2 = 0.0;
  for (int i = 0; i < n; ++i) {
    se += r.exponential();
    const double z = r.normal();
    ne += z;
    ne2 += z * z;
  }
  EXPECT_NEAR(se / n, 1.0, 0.003);
  EXPECT_NEAR(ne / n, 0.0, 0.005);
  EXPECT_NEAR(ne2 / n, 1.0, 0.005);
}

TEST(CounterRng, UniformIntChiSquare) {
  constexpr int bins = 37;
  constexpr int n = 370'000;
  std::vector<int> counts(bins, 0);
  CounterRng r(3, 0);
  for (int i = 0; i < n; ++i) ++counts[r.uniform_int(bins)];
  double chi2 = 0.0;
  const double expected = static_cast<double>(n) / bins;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  const boost::math::chi_squared dist(bins - 1);
  EXPECT_LT(chi2, boost::math::quantile(dist, 0.99));
}

TEST(CounterRng, BinomialAndPoissonMeans) {
  CounterRng r(4, 0);
  constexpr int n = 200'000;
  double sb = 0.0;
  double sp = 0.0;
  double sp2 = 0.0;
  for (int i = 0; i < n; ++i) {
    sb += static_cast<double>(r.binomial(10'000, 1e-4 * 1.5));
    const auto p = static_cast<double>(r.poisson(2.5));
    sp += p;
    sp2 += p * p;
  }
  EXPECT_NEAR(sb / n, 1.5, 4.0 * std::sqrt(1.5 / n));
  EXPECT_NEAR(sp / n, 2.5, 4.0 * std::sqrt(2.5 / n));
  EXPECT_NEAR(sp2 / n - (sp / n) * (sp / n), 2.5, 0.05);
  EXPECT_EQ(r.binomial(0, 0.5), 0u);
  EXPECT_EQ(r.binomial(12, 1.0), 12u);
  EXPECT_EQ(r.poisson(0.0), 0u);
}

TEST(CounterRng, BinomialLargeMeanFallback) {
  CounterRng r(5, 0);
  double s = 0.0;
  constexpr int n = 2'000;
  for (int i = 0; i < n; ++i) s += static_cast<double>(r.binomial(2'000, 0.5));
  EXPECT_NEAR(s / n, 1000.0, 4.0 * std::sqrt(500.0 / n));
}

TEST(Parallel, ChunkedStatsIndependentOfThreadCount) {
  auto sample = [](std::int64_t i) {
    CounterRng r(11, static_cast<std::uint64_t>(i));
    return r.exponential();
  };
  setenv("NOMA_LIMITS_THREADS", "1", 1);
  const auto one = noma::chunked_stats(300'000, sample, 4096);
  setenv("NOMA_LIMITS_THREADS", "4", 1);
  const auto four = noma::chunked_stats(300'000, sample, 4096);
  unsetenv("NOMA_LIMITS_THREADS");
  EXPECT_EQ(one.count, four.count);
  EXPECT_EQ(one.mean, four.mean);
  EXPECT_EQ(one.m2, four.m2);
}

TEST(Parallel, RethrowsWorkerException) {
  setenv("NOMA_LIMITS_THREADS", "3", 1);
  EXPECT_THROW(noma::parallel_for(50,
                                  [](std::size_t i) {
                                    if (i == 17) throw std::runtime_error("boom");
                                  }),
               std::runtime_error);
  unsetenv("NOMA_LIMITS_THREADS");
}

TEST(RunningStats, MergeMatchesSequential) {
  noma::RunningStats all;
  noma::RunningStats left;
  noma::RunningStats right;
  for (int i = 0; i < 1000; ++i) {
    const double x = std::sin(i * 0.37) * 10.0 + i * 0.01;
    all.add(x);
    (i < 400 ? left : right).add(x);
  }
  left.merge(right);
  EXPECT_EQ(left.count, all.count);
  EXPECT_NEAR(left.mean, all.mean, 1e-12);
  EXPECT_NEAR(left.m2, all.m2, 1e-9 * all.m2);
}

}  // namespace
