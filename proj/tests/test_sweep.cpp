#include <cmath>
#include <set>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "noma/sweep.hpp"

namespace {

using noma::Spacing;
using noma::SweepAxis;
using noma::SweepSpec;

SweepSpec small_spec() {
  SweepSpec s;
  s.x_axis = SweepAxis::Load;
  s.x_min = 0.5;
  s.x_max = 2.0;
  s.n_points = 3;
  s.spacing = Spacing::Log;
  s.fixed_value = 10.0;
  s.schemes = {noma::parse_scheme("lds-opt-fading"), noma::parse_scheme("ds-mmse-nofading")};
  return s;
}

TEST(SweepGrid, EndpointsAndSpacing) {
  auto s = small_spec();
  const auto log_grid = noma::sweep_grid(s);
  ASSERT_EQ(log_grid.size(), 3u);
  EXPECT_EQ(log_grid.front(), 0.5);
  EXPECT_NEAR(log_grid[1], 1.0, 1e-15);
  EXPECT_EQ(log_grid.back(), 2.0);
  s.spacing = Spacing::Linear;
  const auto lin = noma::sweep_grid(s);
  EXPECT_DOUBLE_EQ(lin[1], 1.25);
}

TEST(SweepSpec, Validation) {
  auto bad = small_spec();
  bad.n_points = 1;
  EXPECT_THROW(bad.validate(), noma::DomainError);
  bad = small_spec();
  bad.x_min = 3.0;
  EXPECT_THROW(bad.validate(), noma::DomainError);
  bad = small_spec();
  bad.x_min = -1.0;
  EXPECT_THROW(bad.validate(), noma::DomainError);
  bad = small_spec();
  bad.schemes.clear();
  EXPECT_THROW(bad.validate(), noma::DomainError);
  bad = small_spec();
  bad.x_axis = SweepAxis::EbN0Db;
  bad.fixed_value = 0.0;
  EXPECT_THROW(bad.validate(), noma::DomainError);
  EXPECT_THROW(noma::figure_sweep(5), noma::DomainError);
}

TEST(RunSweep, TwoPointsGiveTwoRowsPerScheme) {
  auto s = small_spec();
  s.n_points = 2;
  const auto rows = noma::run_sweep(s);
  EXPECT_EQ(rows.size(), 2 * s.schemes.size());
}

TEST(RunSweep, SortedAndConsistent) {
  const auto rows = noma::run_sweep(small_spec());
  ASSERT_EQ(rows.size(), 6u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_TRUE(rows[i - 1].x < rows[i].x ||
                (rows[i - 1].x == rows[i].x && rows[i - 1].scheme < rows[i].scheme));
  }
  for (const auto& r : rows) {
    ASSERT_TRUE(r.rate.has_value());
    ASSERT_TRUE(r.gamma.has_value());
    // gamma = eta * C / beta by definition of E_b/N_0.
    EXPECT_NEAR(*r.gamma, noma::db_to_linear(10.0) * *r.rate / r.beta, 1e-7 * *r.gamma);
  }
}

TEST(RunSweep, BelowMinimumEnergyGivesEmptyRow) {
  SweepSpec s;
  s.x_axis = SweepAxis::EbN0Db;
  s.x_min = -3.0;
  s.x_max = 0.0;
  s.n_points = 2;
  s.spacing = Spacing::Linear;
  s.fixed_value = 1.0;
  s.schemes = {noma::parse_scheme("lds-opt-fading")};
  const auto rows = noma::run_sweep(s);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_FALSE(rows[0].rate.has_value());
  EXPECT_FALSE(rows[0].gamma.has_value());
  EXPECT_FALSE(rows[0].warning.empty());
  EXPECT_TRUE(rows[1].rate.has_value());
}

TEST(Csv, HeaderFormatAndDeterminism) {
  const auto rows = noma::run_sweep(small_spec());
  std::ostringstream a;
  std::ostringstream b;
  noma::write_csv(a, rows);
  noma::write_csv(b, noma::run_sweep(small_spec()));
  EXPECT_EQ(a.str(), b.str());
  std::istringstream in(a.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "x,scheme,beta,gamma,eta_db,rate_bits_per_dim");
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    int commas = 0;
    for (char c : line) commas += c == ',';
    EXPECT_EQ(commas, 5);
  }
  EXPECT_EQ(n, 6);
  EXPECT_EQ(noma::format_number(0.1), "0.1");
  EXPECT_EQ(noma::format_number(1.0 / 3.0), "0.333333333");
}

TEST(FigurePresets, Shapes) {
  for (int f = 1; f <= 4; ++f) {
    const auto s = noma::figure_sweep(f);
    EXPECT_NO_THROW(s.validate());
    std::set<std::string> names;
    for (const auto& sc : s.schemes) names.insert(noma::to_string(sc));
    EXPECT_EQ(names.size(), s.schemes.size());
  }
  EXPECT_EQ(noma::figure_sweep(3).schemes.size(), 8u);
  EXPECT_EQ(noma::figure_sweep(4).fixed_value, 2.0);
}

TEST(Db, RoundTrip) {
  for (double db : {-1.5, 0.0, 3.0, 20.0}) EXPECT_NEAR(noma::linear_to_db(noma::db_to_linear(db)), db, 1e-12);
}

}  // namespace
