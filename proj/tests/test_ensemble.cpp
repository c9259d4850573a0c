#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include <Eigen/Core>
#include <boost/math/distributions/chi_squared.hpp>
#include <gtest/gtest.h>

#include "noma/ensemble.hpp"
#include "noma/rates.hpp"

namespace {

using noma::GramDiagonal;
using noma::LsdMixture;

TEST(DrawSystem, SingleDimension) {
  const auto d = noma::draw_system(1, 3, 123);
  for (auto p : d.positions) EXPECT_EQ(p, 1);
  EXPECT_EQ(d.n_users, 3);
}

TEST(DrawSystem, Invariants) {
  const auto d = noma::draw_system(50, 400, 9);
  ASSERT_EQ(d.positions.size(), 400u);
  for (std::size_t k = 0; k < 400; ++k) {
    EXPECT_GE(d.positions[k], 1);
    EXPECT_LE(d.positions[k], 50);
    EXPECT_TRUE(d.signs[k] == 1 || d.signs[k] == -1);
    EXPECT_GE(d.fade_powers[k], 0.0);
  }
}

TEST(DrawSystem, FadeMean) {
  const auto d = noma::draw_system(1000, 1'000'000, 5);
  double s = 0.0;
  for (double a : d.fade_powers) s += a;
  EXPECT_NEAR(s / 1e6, 1.0, 0.003);
}

TEST(DrawSystem, OccupancyChiSquare) {
  const auto d = noma::draw_system(1000, 1000, 17);
  // Bin positions into 20 equal groups so expected counts are 50.
  std::vector<int> counts(20, 0);
  for (auto p : d.positions) ++counts[(p - 1) / 50];
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - 50.0) * (c - 50.0) / 50.0;
  EXPECT_LT(chi2, boost::math::quantile(boost::math::chi_squared(19), 0.99));

  int pos = 0;
  for (auto s : d.signs) pos += s > 0;
  EXPECT_NEAR(pos, 500, 4.0 * std::sqrt(250.0));
}

TEST(DrawSystem, DeterministicAndErrors) {
  const auto a = noma::draw_system(64, 200, 77, 3);
  const auto b = noma::draw_system(64, 200, 77, 3);
  EXPECT_EQ(a.positions, b.positions);
  EXPECT_EQ(a.signs, b.signs);
  EXPECT_EQ(a.fade_powers, b.fade_powers);
  EXPECT_NE(noma::draw_system(64, 200, 77, 4).fade_powers, a.fade_powers);
  EXPECT_THROW(noma::draw_system(0, 3, 1), noma::SizeError);
  EXPECT_THROW(noma::draw_system(3, 0, 1), noma::SizeError);
}

TEST(GramDiagonal, HandExamples) {
  noma::SystemDraw d;
  d.n_dims = 4;
  d.n_users = 1;
  d.positions = {3};
  d.signs = {-1};
  d.fade_powers = {2.5};
  EXPECT_EQ(noma::gram_diagonal(d).values, (std::vector<double>{0, 0, 2.5, 0}));

  noma::SystemDraw empty;
  empty.n_dims = 5;
  const auto g = noma::gram_diagonal(empty);
  EXPECT_EQ(g.values, std::vector<double>(5, 0.0));
  const auto m = noma::empirical_moments(g, 3);
  for (double v : m.values) EXPECT_EQ(v, 0.0);
}

TEST(GramDiagonal, MassConservation) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto d = noma::draw_system(1000, 3000, seed);
    const auto g = noma::gram_diagonal(d);
    noma::CompensatedSum a;
    noma::CompensatedSum b;
    for (double v : g.values) a.add(v);
    for (double v : d.fade_powers) b.add(v);
    EXPECT_NEAR(a.value(), b.value(), 1e-12 * b.value());
    EXPECT_DOUBLE_EQ(g.load, 3.0);
  }
}

TEST(GramDiagonal, MatchesExplicitMatrixProduct) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    noma::CounterRng shape(seed, 1000);
    const auto n = static_cast<std::int64_t>(1 + shape.uniform_int(8));
    const auto k = static_cast<std::int64_t>(1 + shape.uniform_int(16));
    const auto d = noma::draw_system(n, k, seed);
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, k);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(k, k);
    for (std::int64_t j = 0; j < k; ++j) {
      s(d.positions[j] - 1, j) = d.signs[j];
      a(j, j) = std::sqrt(d.fade_powers[j]);
    }
    const Eigen::MatrixXd h = s * a * a.transpose() * s.transpose();
    const auto g = noma::gram_diagonal(d);
    for (std::int64_t i = 0; i < n; ++i) {
      for (std::int64_t j = 0; j < n; ++j) {
        if (i != j) {
          EXPECT_EQ(h(i, j), 0.0);
        }
      }
      EXPECT_NEAR(h(i, i), g.values[i], 1e-12 * (1 + g.values[i]));
    }
  }
}

TEST(EmpiricalMoments, LowOrdersMatchLimit) {
  constexpr std::int64_t n = 100'000;
  constexpr int draws = 20;
  std::vector<noma::RunningStats> stats(2);
  for (int d = 0; d < draws; ++d) {
    const auto m = noma::empirical_moments(noma::gram_diagonal(noma::draw_system(n, 150'000, 31, d)), 2);
    EXPECT_EQ(m.orders, (std::vector<int>{1, 2}));
    stats[0].add(m.values[0]);
    stats[1].add(m.values[1]);
  }
  EXPECT_NEAR(stats[0].mean, 1.5, 3.0 * stats[0].std_error());
  EXPECT_NEAR(stats[1].mean, 5.25, 3.0 * stats[1].std_error());
}

TEST(EmpiricalMoments, VarianceShrinksWithN) {
  double prev = INFINITY;
  for (std::int64_t n : {1'000, 10'000, 100'000}) {
    noma::RunningStats s;
    for (int d = 0; d < 20; ++d) {
      s.add(noma::empirical_moments(noma::gram_diagonal(noma::draw_system(n, n, 8, d)), 3).values[2]);
    }
    EXPECT_LT(s.variance(), prev) << "N=" << n;
    prev = s.variance();
  }
}

TEST(EmpiricalOptSe, Basics) {
  const GramDiagonal g{{1.0}, 1.0};
  EXPECT_EQ(noma::empirical_opt_se(g, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(noma::empirical_opt_se(g, 1.0), 1.0);
}

TEST(EmpiricalOptSe, MatchesAnalyticAtLargeN) {
  const auto g = noma::gram_diagonal(noma::draw_system(1'000'000, 1'000'000, 2024));
  const double analytic = noma::opt_se_lds_fading({1.0, 10.0, std::nullopt}).bits_per_dim;
  EXPECT_NEAR(noma::empirical_opt_se(g, 10.0), analytic, 5e-3 * analytic);
}

TEST(LsdMixture, MassAndCdf) {
  for (double beta : {0.1, 1.0, 7.0, 40.0}) {
    const LsdMixture m(beta);
    EXPECT_NEAR(m.total_mass(), 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(m.atom_weight(), std::exp(-beta));
    EXPECT_EQ(m.cdf(-1.0), 0.0);
    EXPECT_DOUBLE_EQ(m.cdf(0.0), std::exp(-beta));
    EXPECT_NEAR(m.cdf(1e4), 1.0, 1e-12);
    double prev = 0.0;
    for (double x = 0.0; x < 3 * beta + 10; x += 0.25) {
      EXPECT_GE(m.cdf(x), prev);
      prev = m.cdf(x);
    }
  }
}

TEST(LsdMixture, CdfMatchesSampling) {
  const LsdMixture m(1.3);
  constexpr int n = 200'000;
  int below = 0;
  for (int i = 0; i < n; ++i) {
    noma::CounterRng r(4, static_cast<std::uint64_t>(i));
    below += m.sample(r) <= 2.0;
  }
  const double p = m.cdf(2.0);
  EXPECT_NEAR(static_cast<double>(below) / n, p, 4.0 * std::sqrt(p * (1 - p) / n));
}

TEST(KsDistance, SampleFromMixtureItself) {
  const LsdMixture m(1.0);
  constexpr int n = 100'000;
  GramDiagonal g;
  g.values.resize(n);
  for (int i = 0; i < n; ++i) {
    noma::CounterRng r(12, static_cast<std::uint64_t>(i));
    g.values[i] = m.sample(r);
  }
  EXPECT_LT(noma::empirical_lsd_cdf_distance(g, m), 1.63 / std::sqrt(double(n)));
}

TEST(KsDistance, QuantilesOfMixtureGiveNearZero) {
  // An ESD placed at the mixture's own quantiles differs by at most 1/N.
  const LsdMixture m(0.8);
  constexpr int n = 2000;
  GramDiagonal g;
  for (int i = 0; i < n; ++i) {
    const double u = (i + 0.5) / n;
    if (u <= m.atom_weight()) {
      g.values.push_back(0.0);
      continue;
    }
    g.values.push_back(noma::find_root_bracketed([&](double x) { return m.cdf(x) - u; }, 0.0, 60.0,
                                                 {1e-14, 1e-15, 10'000}));
  }
  EXPECT_LE(noma::empirical_lsd_cdf_distance(g, m), 1.0 / n + 1e-9);
}

TEST(KsDistance, SystemDrawConvergesToMixture) {
  const LsdMixture m(1.0);
  std::vector<double> mean;
  for (std::int64_t n : {1'000, 10'000, 100'000}) {
    double s = 0.0;
    for (int d = 0; d < 5; ++d) {
      s += noma::empirical_lsd_cdf_distance(noma::gram_diagonal(noma::draw_system(n, n, 55, d)), m);
    }
    mean.push_back(s / 5);
  }
  EXPECT_LT(mean[1], mean[0]);
  EXPECT_LT(mean[2], mean[1]);
  EXPECT_LT(mean[2], 0.01);
}

TEST(McSumf, ZeroSnr) {
  const auto e = noma::mc_sumf_rate(100, 1.0, 0.0, 1000, 3);
  EXPECT_EQ(e.mean, 0.0);
  EXPECT_EQ(e.std_error, 0.0);
}

TEST(McSumf, SingleUserMatchesRayleighCapacity) {
  // beta N = 1 user: no interference ever.
  const auto e = noma::mc_sumf_rate(1000, 1e-3, 2.0, 400'000, 9);
  const double single = noma::scaled_exp_integral_en(1, 0.5) / std::numbers::ln2;
  EXPECT_NEAR(e.mean / 1e-3, single, 3.0 * e.std_error / 1e-3);
}

TEST(McSumf, MatchesAnalyticValue) {
  const auto e = noma::mc_sumf_rate(10'000, 1.0, 10.0, 2'000'000, 21);
  const double analytic = noma::sumf_rate_lds_fading({1.0, 10.0, std::nullopt}).bits_per_dim;
  EXPECT_NEAR(e.mean, analytic, 3.0 * e.std_error);
}

TEST(McSumf, DeterministicAcrossThreadCounts) {
  setenv("NOMA_LIMITS_THREADS", "1", 1);
  const auto a = noma::mc_sumf_rate(500, 2.0, 5.0, 200'000, 4);
  setenv("NOMA_LIMITS_THREADS", "3", 1);
  const auto b = noma::mc_sumf_rate(500, 2.0, 5.0, 200'000, 4);
  unsetenv("NOMA_LIMITS_THREADS");
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.std_error, b.std_error);
  EXPECT_EQ(a.n_samples, 200'000);
  EXPECT_EQ(a.seed, 4u);
}

TEST(McSumf, SizeErrors) {
  EXPECT_THROW(noma::mc_sumf_rate(0, 1.0, 1.0, 10, 1), noma::SizeError);
  EXPECT_THROW(noma::mc_sumf_rate(10, 1.0, 1.0, 0, 1), noma::SizeError);
  EXPECT_THROW(noma::mc_sumf_rate(10, 0.01, 1.0, 10, 1), noma::SizeError);
}

TEST(McDsLogdet, TrivialCases) {
  EXPECT_EQ(noma::mc_ds_fading_logdet(8, 1.0, 0.0, 3, 1).mean, 0.0);
  EXPECT_THROW(noma::mc_ds_fading_logdet(4096, 1.0, 1.0, 1, 1), noma::SizeError);
  // N = K = 1: log2(1 + gamma |a|^2), averaged over Exp(1) fades.
  const auto e = noma::mc_ds_fading_logdet(1, 1.0, 3.0, 20'000, 5);
  const double expected = noma::scaled_exp_integral_en(1, 1.0 / 3.0) / std::numbers::ln2;
  EXPECT_NEAR(e.mean, expected, 4.0 * e.std_error);
}

TEST(McDsLogdet, MatchesLargeSystemFormula) {
  for (auto entries : {noma::DenseEntries::Binary, noma::DenseEntries::Gaussian}) {
    const auto e = noma::mc_ds_fading_logdet(128, 1.0, 10.0, 60, 3, entries);
    const double analytic = noma::opt_se_ds_fading({1.0, 10.0, std::nullopt}).bits_per_dim;
    EXPECT_NEAR(e.mean, analytic, 0.02 * analytic);
  }
}

TEST(McDsLogdet, Deterministic) {
  const auto a = noma::mc_ds_fading_logdet(32, 2.0, 4.0, 10, 8);
  const auto b = noma::mc_ds_fading_logdet(32, 2.0, 4.0, 10, 8);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.std_error, b.std_error);
}

TEST(Independence, LargeSystemUncorrelated) {
  const double c = noma::independence_diagnostic(10'000, 1.0, 100'000, 6);
  EXPECT_LT(std::abs(c), 3.0 / std::sqrt(1e5) + 1e-4);
}

TEST(Independence, TinySystemNegativelyCorrelated) {
  EXPECT_LT(noma::independence_diagnostic(2, 20.0, 20'000, 6), -0.2);
}

TEST(Independence, DeterministicAndErrors) {
  EXPECT_EQ(noma::independence_diagnostic(50, 1.0, 30'000, 2),
            noma::independence_diagnostic(50, 1.0, 30'000, 2));
  EXPECT_THROW(noma::independence_diagnostic(1, 1.0, 100, 1), noma::SizeError);
}

}  // namespace
