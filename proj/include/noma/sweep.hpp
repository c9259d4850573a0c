#pragma once

// Rate curves over load or E_b/N_0, and the CSV form they are written in.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include "noma/error.hpp"
#include "noma/parallel.hpp"
#include "noma/rates.hpp"
#include "noma/scheme.hpp"

namespace noma {

enum class SweepAxis { Load, EbN0Db };
enum class Spacing { Linear, Log };

/// `fixed_value` is E_b/N_0 in dB for load sweeps and beta for E_b/N_0 sweeps.
struct SweepSpec {
  SweepAxis x_axis = SweepAxis::Load;
  double x_min = 0.1;
  double x_max = 10.0;
  int n_points = 41;
  Spacing spacing = Spacing::Log;
  double fixed_value = 10.0;
  std::vector<SchemeSpec> schemes;

  void validate() const {
    if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_min < x_max)) {
      throw DomainError("sweep requires finite x_min < x_max");
    }
    if (n_points < 2) throw DomainError("sweep requires at least 2 points");
    if (spacing == Spacing::Log && !(x_min > 0.0)) {
      throw DomainError("log spacing requires x_min > 0");
    }
    if (!std::isfinite(fixed_value)) throw DomainError("sweep fixed value must be finite");
    if (x_axis == SweepAxis::EbN0Db && !(fixed_value > 0.0)) {
      throw DomainError("E_b/N_0 sweep requires a load beta > 0");
    }
    if (schemes.empty()) throw DomainError("sweep requires at least one scheme");
    for (const auto& s : schemes) require_supported(s);
  }
};

/// One curve point. `gamma` and `rate` are empty when the point has no solution.
struct SweepRow {
  double x = 0.0;
  std::string scheme;
  double beta = 0.0;
  std::optional<double> gamma;
  double eta_db = 0.0;
  std::optional<double> rate;
  std::string warning;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double v) { return 10.0 * std::log10(v); }

inline std::vector<double> sweep_grid(const SweepSpec& spec) {
  spec.validate();
  std::vector<double> xs(spec.n_points);
  const double last = spec.n_points - 1;
  for (int i = 0; i < spec.n_points; ++i) {
    const double t = i / last;
    if (spec.spacing == Spacing::Log) {
      xs[i] = std::exp(std::log(spec.x_min) + t * (std::log(spec.x_max) - std::log(spec.x_min)));
    } else {
      xs[i] = spec.x_min + t * (spec.x_max - spec.x_min);
    }
  }
  xs.front() = spec.x_min;
  xs.back() = spec.x_max;
  return xs;
}

/// Rate of `scheme` at load beta and E_b/N_0 given in dB.
inline SweepRow rate_at_eta(const SchemeSpec& scheme, double beta, double eta_db, double x) {
  SweepRow row;
  row.x = x;
  row.scheme = to_string(scheme);
  row.beta = beta;
  row.eta_db = eta_db;
  try {
    const double gamma = gamma_from_eta(scheme, beta, db_to_linear(eta_db));
    row.gamma = gamma;
    row.rate = spectral_efficiency(scheme, {beta, gamma, std::nullopt}).bits_per_dim;
  } catch (const DomainError& e) {
    row.gamma.reset();
    row.rate.reset();
    row.warning = e.what();
  }
  return row;
}

/// Evaluates every (x, scheme) pair; rows come back sorted by (x, scheme name).
inline std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
  const auto xs = sweep_grid(spec);
  const std::size_t n_schemes = spec.schemes.size();
  std::vector<SweepRow> rows(xs.size() * n_schemes);
  parallel_for(rows.size(), [&](std::size_t idx) {
    const double x = xs[idx / n_schemes];
    const auto& scheme = spec.schemes[idx % n_schemes];
    rows[idx] = spec.x_axis == SweepAxis::Load ? rate_at_eta(scheme, x, spec.fixed_value, x)
                                               : rate_at_eta(scheme, spec.fixed_value, x, x);
  });
  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return std::tie(a.x, a.scheme) < std::tie(b.x, b.scheme);
  });
  return rows;
}

/// Nine significant digits, the CLI's number format.
inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline constexpr const char* kCsvHeader = "x,scheme,beta,gamma,eta_db,rate_bits_per_dim";

inline void write_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << kCsvHeader << '\n';
  for (const auto& r : rows) {
    os << format_number(r.x) << ',' << r.scheme << ',' << format_number(r.beta) << ','
       << (r.gamma ? format_number(*r.gamma) : "") << ',' << format_number(r.eta_db) << ','
       << (r.rate ? format_number(*r.rate) : "") << '\n';
  }
}

// Presets reproducing the four published figures.

inline SweepSpec figure_sweep(int figure) {
  using enum Spreading;
  using enum Detector;
  const std::vector<SchemeSpec> linear = {
      {OneSparse, Fading::Rayleigh, Sumf}, {OneSparse, Fading::None, Sumf},
      {Dense, Fading::Rayleigh, Mmse},     {Dense, Fading::None, Mmse}};
  const std::vector<SchemeSpec> optimum = {
      {OneSparse, Fading::Rayleigh, Optimum}, {OneSparse, Fading::None, Optimum},
      {Dense, Fading::Rayleigh, Optimum},     {Dense, Fading::None, Optimum}};
  switch (figure) {
    case 1: return {SweepAxis::Load, 0.1, 10.0, 41, Spacing::Log, 10.0, linear};
    case 2: return {SweepAxis::Load, 0.1, 10.0, 41, Spacing::Log, 10.0, optimum};
    case 3:
    case 4:
      return {SweepAxis::EbN0Db, -1.5, 20.0, 44, Spacing::Linear, figure == 3 ? 1.0 : 2.0,
              all_formula_schemes()};
    default: throw DomainError("figure must be 1, 2, 3 or 4");
  }
}

}  // namespace noma
