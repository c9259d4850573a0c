#pragma once

// The acceptance checks, shared by the CLI `verify` command and the
// acceptance test binary.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "noma/combinatorics.hpp"
#include "noma/ensemble.hpp"
#include "noma/rates.hpp"
#include "noma/scheme.hpp"
#include "noma/sweep.hpp"

namespace noma {

struct Check {
  int criterion = 0;
  std::string name;
  double expected = 0.0;
  double observed = 0.0;
  double tolerance = 0.0;  // absolute bound on |observed - expected|
  bool passed = false;
};

struct VerifyReport {
  std::vector<Check> checks;
  bool overall = false;
  std::vector<std::uint64_t> seeds;
  double wall_time_s = 0.0;
};

enum class Suite { Fast, Full };

inline Suite parse_suite(const std::string& s) {
  if (s == "fast") return Suite::Fast;
  if (s == "full") return Suite::Full;
  throw DomainError("suite must be 'fast' or 'full'");
}

namespace verify_detail {

inline std::string fmt(double v) { return format_number(v); }

inline Check abs_check(int criterion, std::string name, double expected, double observed,
                       double tolerance) {
  const bool ok = std::isfinite(observed) && std::abs(observed - expected) <= tolerance;
  return {criterion, std::move(name), expected, observed, tolerance, ok};
}

inline Check rel_check(int criterion, std::string name, double expected, double observed,
                       double rel) {
  return abs_check(criterion, std::move(name), expected, observed, rel * std::abs(expected));
}

/// A boolean claim recorded as expected 1, observed 1 or 0.
inline Check claim(int criterion, std::string name, bool holds) {
  return {criterion, std::move(name), 1.0, holds ? 1.0 : 0.0, 0.0, holds};
}

inline double rate(const SchemeSpec& s, double beta, double gamma) {
  return spectral_efficiency(s, {beta, gamma, std::nullopt}).bits_per_dim;
}

/// First and second derivatives of C at gamma = 0 from the cubic-quartic fit
/// C(g) = a g + b g^2 + c g^3 + d g^4 through g = h, 2h, 3h, 4h (C(0) = 0).
inline std::array<double, 2> derivatives_at_zero(const SchemeSpec& s, double beta, double h) {
  std::array<double, 4> f{};
  for (int j = 0; j < 4; ++j) f[j] = rate(s, beta, (j + 1) * h) / ((j + 1) * h);
  // f_j = a + b x_j + c x_j^2 + d x_j^3 at x_j = (j+1)h; Newton divided
  // differences give a = p(0) and b = p'(0).
  std::array<double, 4> x{h, 2 * h, 3 * h, 4 * h};
  std::array<double, 4> dd = f;
  for (int order = 1; order < 4; ++order) {
    for (int j = 3; j >= order; --j) dd[j] = (dd[j] - dd[j - 1]) / (x[j] - x[j - order]);
  }
  // p(t) = dd0 + dd1 (t-x0) + dd2 (t-x0)(t-x1) + dd3 (t-x0)(t-x1)(t-x2)
  const double a = dd[0] - dd[1] * x[0] + dd[2] * x[0] * x[1] - dd[3] * x[0] * x[1] * x[2];
  const double b = dd[1] - dd[2] * (x[0] + x[1]) +
                   dd[3] * (x[0] * x[1] + x[0] * x[2] + x[1] * x[2]);
  return {a, 2.0 * b};
}

constexpr std::array<double, 3> kLoads = {0.5, 1.0, 2.0};

inline SchemeSpec scheme(const char* name) { return parse_scheme(name); }

inline std::string at(double beta) { return " beta=" + fmt(beta); }
inline std::string at(double beta, double gamma) {
  return " beta=" + fmt(beta) + " gamma=" + fmt(gamma);
}

}  // namespace verify_detail

// Analytic criteria ---------------------------------------------------------

inline std::vector<Check> check_minimum_energy_per_bit() {
  using namespace verify_detail;
  std::vector<Check> out;
  constexpr double gamma = 1e-5;
  for (const char* name : {"lds-sumf-fading", "lds-opt-fading", "lds-opt-nofading", "ds-opt-fading"}) {
    for (double beta : kLoads) {
      const double eta = beta * gamma / rate(scheme(name), beta, gamma);
      out.push_back(rel_check(1, std::string("eta_min ") + name + at(beta), kLn2, eta, 2e-3));
    }
  }
  return out;
}

inline std::vector<Check> check_low_snr_slopes() {
  using namespace verify_detail;
  std::vector<Check> out;
  for (const char* name : {"lds-sumf-fading", "lds-opt-fading"}) {
    const auto s = scheme(name);
    for (double beta : kLoads) {
      const auto [d1, d2] = derivatives_at_zero(s, beta, 1e-3);
      const double slope = 2.0 * kLn2 * d1 * d1 / -d2;
      out.push_back(rel_check(2, std::string("low_snr_slope ") + name + at(beta),
                              low_snr_slope(s, beta), slope, 1e-2));
    }
  }
  return out;
}

inline std::vector<Check> check_high_snr_slopes() {
  using namespace verify_detail;
  std::vector<Check> out;
  const double span = std::log2(1e3);
  for (const char* name : {"lds-sumf-fading", "lds-opt-fading", "ds-mmse-nofading"}) {
    const auto s = scheme(name);
    for (double beta : kLoads) {
      const double slope = (rate(s, beta, 1e8) - rate(s, beta, 1e5)) / span;
      const double expected = high_snr_slope(s, beta);
      const std::string label = std::string("high_snr_slope ") + name + at(beta);
      out.push_back(expected == 0.0 ? abs_check(3, label, 0.0, slope, 0.02)
                                    : rel_check(3, label, expected, slope, 2e-2));
    }
  }
  return out;
}

inline std::vector<Check> check_representation_equality() {
  using namespace verify_detail;
  std::vector<Check> out;
  double worst_opt = 0.0;
  double worst_sumf = 0.0;
  for (double beta : {0.5, 1.0, 2.0, 4.0}) {
    for (double gamma : {0.1, 1.0, 10.0, 100.0}) {
      const ChannelPoint p{beta, gamma, std::nullopt};
      worst_opt = std::max(worst_opt, std::abs(opt_se_lds_fading(p).bits_per_dim -
                                               opt_se_lds_fading_alt(p).bits_per_dim));
      worst_sumf = std::max(worst_sumf, std::abs(sumf_rate_lds_fading(p).bits_per_dim -
                                                 sumf_rate_lds_fading_unit_interval(p).bits_per_dim));
    }
  }
  out.push_back(abs_check(4, "opt lds fading: two integral forms, max difference on 4x4 grid", 0.0,
                          worst_opt, 1e-8));
  out.push_back(abs_check(4, "sumf lds fading: two integral forms, max difference on 4x4 grid",
                          0.0, worst_sumf, 1e-10));
  return out;
}

inline std::vector<Check> check_derivative_anchors() {
  using namespace verify_detail;
  std::vector<Check> out;
  const auto s = scheme("lds-opt-fading");
  for (double beta : kLoads) {
    const auto [d1, d2] = derivatives_at_zero(s, beta, 1e-3);
    out.push_back(rel_check(5, "dC/dgamma(0) lds-opt-fading" + at(beta), beta / kLn2, d1, 1e-3));
    out.push_back(rel_check(5, "-d2C/dgamma2(0) lds-opt-fading" + at(beta),
                            (2.0 * beta + beta * beta) / kLn2, -d2, 1e-2));
  }
  return out;
}

inline std::vector<Check> check_lah_row() {
  using namespace verify_detail;
  std::vector<Check> out;
  const std::array<int, 4> row{24, 36, 12, 1};
  bool exact = true;
  for (int l = 1; l <= 4; ++l) exact = exact && lah(4, l) == row[l - 1];
  out.push_back(claim(6, "lah row L=4 equals 24 36 12 1", exact));
  return out;
}

inline std::vector<Check> check_figure_claims() {
  using namespace verify_detail;
  std::vector<Check> out;
  auto by_scheme = [](const std::vector<SweepRow>& rows, const std::string& name) {
    std::vector<const SweepRow*> sel;
    for (const auto& r : rows) {
      if (r.scheme == name) sel.push_back(&r);
    }
    return sel;
  };
  const auto fig1 = run_sweep(figure_sweep(1));
  for (const char* fading : {"fading", "nofading"}) {
    const auto lds = by_scheme(fig1, std::string("lds-sumf-") + fading);
    const auto ds = by_scheme(fig1, std::string("ds-mmse-") + fading);
    bool over = true;
    bool under = true;
    for (std::size_t i = 0; i < lds.size(); ++i) {
      if (!lds[i]->rate || !ds[i]->rate) {
        over = under = false;
        continue;
      }
      if (lds[i]->beta >= 1.5) over = over && *lds[i]->rate > *ds[i]->rate;
      if (lds[i]->beta <= 0.5) under = under && *lds[i]->rate < *ds[i]->rate;
    }
    out.push_back(claim(11, std::string("fig1 ") + fading + ": lds-sumf > ds-mmse for beta >= 1.5", over));
    out.push_back(claim(11, std::string("fig1 ") + fading + ": lds-sumf < ds-mmse for beta <= 0.5", under));
  }
  constexpr double eta_db = 10.0;
  for (const char* spreading : {"lds-sumf", "ds-mmse"}) {
    const std::string base(spreading);
    auto at_load = [&](const std::string& name, double beta) {
      return rate_at_eta(scheme(name.c_str()), beta, eta_db, beta).rate.value_or(NAN);
    };
    out.push_back(claim(11, "fading raises " + base + " at beta=3",
                        at_load(base + "-fading", 3.0) > at_load(base + "-nofading", 3.0)));
    out.push_back(claim(11, "fading lowers " + base + " at beta=0.3",
                        at_load(base + "-fading", 0.3) < at_load(base + "-nofading", 0.3)));
  }
  const auto fig2 = run_sweep(figure_sweep(2));
  for (const char* fading : {"fading", "nofading"}) {
    const auto lds = by_scheme(fig2, std::string("lds-opt-") + fading);
    const auto ds = by_scheme(fig2, std::string("ds-opt-") + fading);
    bool below = true;
    for (std::size_t i = 0; i < lds.size(); ++i) {
      below = below && lds[i]->rate && ds[i]->rate && *lds[i]->rate <= *ds[i]->rate;
    }
    out.push_back(claim(11, std::string("fig2 ") + fading + ": lds-opt <= ds-opt at every load", below));
  }
  return out;
}

inline std::vector<Check> check_carleman() {
  std::vector<Check> out;
  for (double beta : {0.1, 1.0, 10.0}) {
    out.push_back(verify_detail::claim(12, "carleman bound k<=10" + verify_detail::at(beta),
                                       carleman_bound_holds(beta, 10)));
  }
  return out;
}

inline std::vector<Check> check_ds_anchors() {
  using namespace verify_detail;
  const ChannelPoint p{1.0, 2.0, std::nullopt};
  return {abs_check(13, "mmse_se_ds_nofading beta=1 gamma=2", 1.0,
                    mmse_se_ds_nofading(p).bits_per_dim, 1e-4),
          abs_check(13, "opt_se_ds_nofading beta=1 gamma=2", 1.27865,
                    opt_se_ds_nofading(p).bits_per_dim, 1e-4)};
}

// Monte Carlo criteria ------------------------------------------------------

inline std::vector<Check> check_empirical_moments(std::uint64_t seed) {
  using namespace verify_detail;
  std::vector<Check> out;
  constexpr std::int64_t n = 100'000;
  constexpr int draws = 20;
  constexpr int l_max = 4;
  for (double beta : {0.5, 1.5}) {
    std::vector<RunningStats> stats(l_max);
    const auto k = std::llround(beta * n);
    for (int d = 0; d < draws; ++d) {
      const auto m = empirical_moments(gram_diagonal(draw_system(n, k, seed, d)), l_max);
      for (int l = 0; l < l_max; ++l) stats[l].add(m.values[l]);
    }
    for (int l = 1; l <= l_max; ++l) {
      const auto& s = stats[l - 1];
      out.push_back(abs_check(6, "moment L=" + std::to_string(l) + at(beta),
                              lsd_moment(EnsembleKind::LdsFading, l, beta), s.mean,
                              3.0 * s.std_error()));
    }
  }
  return out;
}

inline std::vector<Check> check_lsd_law(std::uint64_t seed) {
  const auto g = gram_diagonal(draw_system(100'000, 100'000, seed));
  return {verify_detail::abs_check(7, "KS distance ESD vs compound Poisson N=1e5 beta=1", 0.0,
                                   empirical_lsd_cdf_distance(g, LsdMixture(1.0)), 0.01)};
}

inline std::vector<Check> check_sumf_monte_carlo(std::uint64_t seed) {
  using namespace verify_detail;
  std::vector<Check> out;
  for (const auto& [beta, gamma] : std::array<std::pair<double, double>, 3>{{{1, 10}, {3, 10}, {0.5, 1}}}) {
    const double analytic = sumf_rate_lds_fading({beta, gamma, std::nullopt}).bits_per_dim;
    const auto mc = mc_sumf_rate(10'000, beta, gamma, 10'000'000, seed);
    out.push_back(abs_check(8, "sumf MC within 3 std errors" + at(beta, gamma), analytic, mc.mean,
                            3.0 * mc.std_error));
    out.push_back(rel_check(8, "sumf MC within 0.5%" + at(beta, gamma), analytic, mc.mean, 5e-3));
  }
  return out;
}

inline std::vector<Check> check_opt_monte_carlo(std::uint64_t seed) {
  using namespace verify_detail;
  std::vector<Check> out;
  constexpr std::int64_t n = 1'000'000;
  for (const auto& [beta, gamma] : std::array<std::pair<double, double>, 2>{{{1, 10}, {2, 1}}}) {
    const auto g = gram_diagonal(draw_system(n, std::llround(beta * n), seed));
    out.push_back(rel_check(9, "empirical opt SE N=1e6" + at(beta, gamma),
                            opt_se_lds_fading({beta, gamma, std::nullopt}).bits_per_dim,
                            empirical_opt_se(g, gamma), 5e-3));
  }
  return out;
}

inline std::vector<Check> check_ds_fading_monte_carlo(std::uint64_t seed) {
  using namespace verify_detail;
  std::vector<Check> out;
  for (const auto& [beta, gamma] : std::array<std::pair<double, double>, 2>{{{0.5, 10}, {2, 10}}}) {
    const ChannelPoint p{beta, gamma, std::nullopt};
    const auto mc = mc_ds_fading_logdet(256, beta, gamma, 200, seed);
    out.push_back(rel_check(10, "dense log-det N=256 vs opt_se_ds_fading" + at(beta, gamma),
                            opt_se_ds_fading(p).bits_per_dim, mc.mean, 2e-2));
    const double x = mmse_efficiency_ds_fading(p).value;
    out.push_back(abs_check(10, "mmse fixed-point residual" + at(beta, gamma), 0.0,
                            mmse_fixed_point_residual(beta, gamma, x), 1e-10));
  }
  return out;
}

// Suites --------------------------------------------------------------------

inline VerifyReport run_verify(Suite suite, std::uint64_t seed = 42) {
  const auto start = std::chrono::steady_clock::now();
  VerifyReport report;
  auto append = [&](std::vector<Check> cs) {
    for (auto& c : cs) report.checks.push_back(std::move(c));
  };
  append(check_minimum_energy_per_bit());
  append(check_low_snr_slopes());
  append(check_high_snr_slopes());
  append(check_representation_equality());
  append(check_derivative_anchors());
  append(check_lah_row());
  if (suite == Suite::Full) {
    append(check_empirical_moments(seed));
    append(check_lsd_law(seed));
    append(check_sumf_monte_carlo(seed));
    append(check_opt_monte_carlo(seed));
    append(check_ds_fading_monte_carlo(seed));
    report.seeds.push_back(seed);
  }
  append(check_figure_claims());
  append(check_carleman());
  append(check_ds_anchors());
  std::stable_sort(report.checks.begin(), report.checks.end(),
                   [](const Check& a, const Check& b) { return a.criterion < b.criterion; });
  report.overall = true;
  for (const auto& c : report.checks) report.overall = report.overall && c.passed;
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace noma
