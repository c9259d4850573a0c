#pragma once

// Large-system spectral efficiency of dense (DS) and one-sparse (LDS)
// spreading, with and without Rayleigh fading, for linear and optimum
// detection. Every rate is returned in bits/s/Hz.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "noma/error.hpp"
#include "noma/numerics.hpp"
#include "noma/scheme.hpp"

namespace noma {

inline constexpr double kLn2 = std::numbers::ln2;

/// Large-system operating point: load beta = K/N and per-symbol SNR gamma
/// (linear). eta (E_b/N_0, linear) is filled in by the conversion routines.
struct ChannelPoint {
  double beta = 1.0;
  double gamma = 0.0;
  std::optional<double> eta;
};

struct RateValue {
  double bits_per_dim = 0.0;
  double err_estimate = 0.0;
};

/// Multiuser efficiency of the MMSE receiver with dense spreading and fading.
struct MmseEfficiency {
  double value = 1.0;
};

/// How the Gamma(k) expectation of log(1 + gamma * lambda) is evaluated inside
/// the LDS fading optimum formula.
enum class InnerExpectation {
  Quadrature,  ///< adaptive quadrature against the Gamma(k, 1) density
  ClosedForm,  ///< sum_{q=1..k} e^{1/gamma} E_q(1/gamma)
};

namespace detail {

inline void check_point(const ChannelPoint& p) {
  if (!(p.beta > 0.0) || !std::isfinite(p.beta)) {
    throw DomainError("load beta must be finite and > 0");
  }
  if (!(p.gamma >= 0.0) || !std::isfinite(p.gamma)) {
    throw DomainError("SNR gamma must be finite and >= 0");
  }
}

// Positive integrands: converge on relative error alone.
inline Tolerance relative_only(const Tolerance& tol) {
  tol.validate();
  return {tol.rel, 0.0, tol.max_evals};
}

// Truncation tolerance for Poisson series whose sum has size ~ magnitude.
inline Tolerance series_tolerance(const Tolerance& tol, double magnitude) {
  tol.validate();
  return {tol.rel, std::max(tol.rel * magnitude, 1e-300), tol.max_evals};
}

// Rough size of an optimum-decoding spectral efficiency in nats; only used
// to scale truncation tolerances.
inline double magnitude_hint(double beta, double gamma) {
  return std::min(beta * std::log1p(gamma), std::log1p(beta * gamma)) + 1e-300;
}

// E[1 / (1 + s X)], X ~ Exp(1).
inline double inverse_snr_expectation(double s) {
  if (s <= 0.0) return 1.0;
  const double a = 1.0 / s;
  if (!std::isfinite(a)) return 1.0;
  return a * scaled_exp_integral_en(1, a);
}

// E[log(1 + c X)] in nats, X ~ Exp(1).
inline double rayleigh_log_expectation(double c) {
  if (c <= 0.0) return 0.0;
  return scaled_exp_integral_en(1, 1.0 / c);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// LDS
// ---------------------------------------------------------------------------

/// SUMF rate with one-sparse spreading and Rayleigh fading:
/// R = beta / ln 2 * g_beta(1 / gamma), with
/// g_beta(a) = int_0^inf e^{-a z} e^{-beta z / (1 + z)} / (1 + z) dz.
inline RateValue sumf_rate_lds_fading(const ChannelPoint& p, const Tolerance& tol = {}) {
  detail::check_point(p);
  if (p.gamma == 0.0) return {0.0, 0.0};
  const double alpha = 1.0 / p.gamma;
  const double beta = p.beta;
  auto g = [alpha, beta](double z) {
    return std::exp(-alpha * z - beta * z / (1.0 + z)) / (1.0 + z);
  };
  const auto q = integrate_semi_infinite(g, detail::relative_only(tol), std::min(1.0, p.gamma));
  return {beta / kLn2 * q.value, beta / kLn2 * q.err_estimate};
}

/// The same SUMF rate from its unit-interval representation
/// R = beta / ln 2 * int_0^1 exp(-t (beta + 1 / ((1 - t) gamma))) / (1 - t) dt.
/// Kept as an independent cross-check of sumf_rate_lds_fading.
inline RateValue sumf_rate_lds_fading_unit_interval(const ChannelPoint& p,
                                                    const Tolerance& tol = {}) {
  detail::check_point(p);
  if (p.gamma == 0.0) return {0.0, 0.0};
  const double beta = p.beta;
  const double gamma = p.gamma;
  auto h = [beta, gamma](double t) {
    const double one_minus = 1.0 - t;
    return std::exp(-t * (beta + 1.0 / (one_minus * gamma))) / one_minus;
  };
  const double knee = std::min(1.0, gamma) / (1.0 + std::min(1.0, gamma));
  const std::array<double, 6> breaks = {knee, 0.5, 0.75, 0.9375, 0.99609375, 0.9999847412109375};
  const auto q = integrate(h, 0.0, 1.0, detail::relative_only(tol), breaks);
  return {beta / kLn2 * q.value, beta / kLn2 * q.err_estimate};
}

/// Optimum decoding with one-sparse spreading and Rayleigh fading: a Poisson
/// mixture over k of E[log2(1 + gamma * lambda)], lambda ~ Gamma(k, 1).
inline RateValue opt_se_lds_fading(const ChannelPoint& p, const Tolerance& tol = {},
                                   InnerExpectation inner = InnerExpectation::Quadrature) {
  detail::check_point(p);
  if (p.gamma == 0.0) return {0.0, 0.0};
  const double gamma = p.gamma;
  const Tolerance quad_tol = detail::relative_only(tol);
  double quad_err = 0.0;
  std::vector<double> partial{0.0};  // closed form: partial[k] = sum_{q<=k}
  auto expectation = [&](int k) -> double {
    if (inner == InnerExpectation::ClosedForm) {
      while (static_cast<int>(partial.size()) <= k) {
        const int q = static_cast<int>(partial.size());
        partial.push_back(partial.back() + scaled_exp_integral_en(q, 1.0 / gamma));
      }
      return partial[k];
    }
    const double log_norm = std::lgamma(static_cast<double>(k));
    auto integrand = [k, gamma, log_norm](double lambda) {
      const double log_density = (k == 1) ? -lambda : (k - 1) * std::log(lambda) - lambda - log_norm;
      return std::exp(log_density) * std::log1p(gamma * lambda);
    };
    const auto q = integrate_semi_infinite(integrand, quad_tol, static_cast<double>(k));
    quad_err = std::max(quad_err, q.err_estimate);
    return q.value;
  };
  const double magnitude = detail::magnitude_hint(p.beta, gamma);
  const double nats = poisson_weighted_sum(p.beta, expectation, std::log1p(gamma) + 1.0,
                                           detail::series_tolerance(tol, magnitude));
  return {nats / kLn2, (quad_err + tol.rel * magnitude) / kLn2};
}

/// Optimum decoding with LDS and fading via the derivative representation
/// C = sum_k Poisson(k) int_0^gamma k e^{1/x} E_{k+1}(1/x) dx / x (nats).
/// Same quantity as opt_se_lds_fading by a different route.
inline RateValue opt_se_lds_fading_alt(const ChannelPoint& p, const Tolerance& tol = {}) {
  detail::check_point(p);
  if (p.gamma == 0.0) return {0.0, 0.0};
  const double gamma = p.gamma;
  const Tolerance quad_tol = detail::relative_only(tol);
  double quad_err = 0.0;
  auto term = [&](int k) {
    auto integrand = [k](double x) {
      const double a = 1.0 / x;
      return k * scaled_exp_integral_en(k + 1, a) * a;
    };
    std::vector<double> breaks;
    for (double b = 1.0 / (k + 1.0); b < gamma; b *= 8.0) breaks.push_back(b);
    const auto q = integrate(integrand, 0.0, gamma, quad_tol, breaks);
    quad_err = std::max(quad_err, q.err_estimate);
    return q.value;
  };
  const double magnitude = detail::magnitude_hint(p.beta, gamma);
  const double nats = poisson_weighted_sum(p.beta, term, 2.0 * (std::log1p(gamma) + 1.0),
                                           detail::series_tolerance(tol, magnitude));
  return {nats / kLn2, (quad_err + tol.rel * magnitude) / kLn2};
}

/// Optimum decoding with LDS, no fading: sum_k Poisson(k) log2(1 + k gamma).
inline RateValue opt_se_lds_nofading(const ChannelPoint& p, const Tolerance& tol = {}) {
  detail::check_point(p);
  if (p.gamma == 0.0) return {0.0, 0.0};
  const double gamma = p.gamma;
  const double magnitude = detail::magnitude_hint(p.beta, gamma);
  const double nats = poisson_weighted_sum(
      p.beta, [gamma](int k) { return std::log1p(k * gamma); }, std::log1p(gamma) + 1.0,
      detail::series_tolerance(tol, magnitude));
  return {nats / kLn2, tol.rel * magnitude / kLn2};
}

/// Linear detection (SUMF = MMSE = ZF) with LDS, no fading:
/// beta * sum_{k >= 0} Poisson(k) log2(1 + gamma / (k gamma + 1)).
inline RateValue sumf_rate_lds_nofading(const ChannelPoint& p, const Tolerance& tol = {}) {
  detail::check_point(p);
  if (p.gamma == 0.0) return {0.0, 0.0};
  const double gamma = p.gamma;
  const double beta = p.beta;
  const double k0 = std::exp(-beta) * std::log1p(gamma);
  const double magnitude = std::log1p(gamma) * std::exp(-beta) + std::log1p(1.0 / (beta + 1.0)) * std::min(1.0, gamma);
  const double rest = poisson_weighted_sum(
      beta, [gamma](int k) { return std::log1p(gamma / (k * gamma + 1.0)); }, 1.0,
      detail::series_tolerance(tol, magnitude));
  return {beta * (k0 + rest) / kLn2, beta * tol.rel * magnitude / kLn2};
}

// ---------------------------------------------------------------------------
// DS, no fading
// ---------------------------------------------------------------------------

/// F(x, z) = (sqrt(x (1 + sqrt z)^2 + 1) - sqrt(x (1 - sqrt z)^2 + 1))^2,
/// evaluated as 16 x^2 z / (sum of the roots)^2 to avoid cancellation.
inline double f_transform(double x, double z) {
  if (!(x >= 0.0) || !(z >= 0.0) || !std::isfinite(x) || !std::isfinite(z)) {
    throw DomainError("f_transform requires finite x >= 0 and z >= 0");
  }
  const double rz = std::sqrt(z);
  const double d = std::sqrt(x * (1.0 + rz) * (1.0 + rz) + 1.0) +
                   std::sqrt(x * (1.0 - rz) * (1.0 - rz) + 1.0);
  return 16.0 * x * x * z / (d * d);
}

/// Optimum decoding with dense spreading, no fading.
inline RateValue opt_se_ds_nofading(const ChannelPoint& p) {
  detail::check_point(p);
  if (p.gamma == 0.0) return {0.0, 0.0};
  const double beta = p.beta;
  const double gamma = p.gamma;
  const double f4 = f_transform(gamma, beta) / 4.0;
  const double rz = std::sqrt(beta);
  const double d = std::sqrt(gamma * (1.0 + rz) * (1.0 + rz) + 1.0) +
                   std::sqrt(gamma * (1.0 - rz) * (1.0 - rz) + 1.0);
  const double f_over_4gamma = 4.0 * gamma * beta / (d * d);
  const double nats = beta * std::log1p(gamma - f4) + std::log1p(beta * gamma - f4) - f_over_4gamma;
  return {std::max(0.0, nats / kLn2), 0.0};
}

/// MMSE detection with dense spreading, no fading: beta log2(1 + gamma - F/4).
inline RateValue mmse_se_ds_nofading(const ChannelPoint& p) {
  detail::check_point(p);
  if (p.gamma == 0.0) return {0.0, 0.0};
  const double f4 = f_transform(p.gamma, p.beta) / 4.0;
  return {p.beta * std::log1p(p.gamma - f4) / kLn2, 0.0};
}

// ---------------------------------------------------------------------------
// DS, fading
// ---------------------------------------------------------------------------

/// Residual x - 1 + beta - beta E[1 / (1 + x gamma |a|^2)] of the multiuser
/// efficiency fixed point.
inline double mmse_fixed_point_residual(double beta, double gamma, double x) {
  return x - 1.0 + beta - beta * detail::inverse_snr_expectation(x * gamma);
}

/// Multiuser efficiency x in (max(0, 1 - beta), 1] solving
/// x = 1 - beta + beta E[1 / (1 + x gamma |a|^2)], |a|^2 ~ Exp(1).
/// The residual is strictly increasing in x, so the root is unique.
inline MmseEfficiency mmse_efficiency_ds_fading(const ChannelPoint& p, const Tolerance& tol = {}) {
  detail::check_point(p);
  if (p.gamma == 0.0) return {1.0};
  const double beta = p.beta;
  const double gamma = p.gamma;
  auto h = [beta, gamma](double x) { return mmse_fixed_point_residual(beta, gamma, x); };
  const Tolerance root_tol{1e-15, std::min(tol.abs, 1e-13), std::max<std::int64_t>(tol.max_evals, 2000)};
  const double x = find_root_bracketed(h, std::max(0.0, 1.0 - beta), 1.0, root_tol);
  return {x};
}

/// MMSE detection with dense spreading and fading: beta E[log2(1 + gamma x |a|^2)].
inline RateValue mmse_se_ds_fading(const ChannelPoint& p, const Tolerance& tol = {}) {
  detail::check_point(p);
  if (p.gamma == 0.0) return {0.0, 0.0};
  const double x = mmse_efficiency_ds_fading(p, tol).value;
  return {p.beta * detail::rayleigh_log_expectation(p.gamma * x) / kLn2, 0.0};
}

/// Optimum decoding with dense spreading and fading:
/// C_mmse + (x - 1 - ln x) / ln 2 with x the multiuser efficiency.
inline RateValue opt_se_ds_fading(const ChannelPoint& p, const Tolerance& tol = {}) {
  detail::check_point(p);
  if (p.gamma == 0.0) return {0.0, 0.0};
  const double x = mmse_efficiency_ds_fading(p, tol).value;
  const double mmse = p.beta * detail::rayleigh_log_expectation(p.gamma * x);
  const double correction = (x - 1.0) - std::log(x);
  return {(mmse + correction) / kLn2, 0.0};
}

// ---------------------------------------------------------------------------
// Dispatch, asymptotics, E_b/N_0 conversion
// ---------------------------------------------------------------------------

inline RateValue spectral_efficiency(const SchemeSpec& s, const ChannelPoint& p,
                                     const Tolerance& tol = {}) {
  require_supported(s);
  const bool fading = s.fading == Fading::Rayleigh;
  const bool opt = s.detector == Detector::Optimum;
  if (s.spreading == Spreading::OneSparse) {
    if (opt) return fading ? opt_se_lds_fading(p, tol) : opt_se_lds_nofading(p, tol);
    return fading ? sumf_rate_lds_fading(p, tol) : sumf_rate_lds_nofading(p, tol);
  }
  if (opt) return fading ? opt_se_ds_fading(p, tol) : opt_se_ds_nofading(p);
  return fading ? mmse_se_ds_fading(p, tol) : mmse_se_ds_nofading(p);
}

/// Minimum energy per bit (linear); ln 2 for every supported scheme.
inline double eta_min(const SchemeSpec& s) {
  require_supported(s);
  return kLn2;
}

namespace detail {
inline void check_beta(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw DomainError("load beta must be finite and > 0");
  }
}
}  // namespace detail

/// Slope at the minimum energy per bit, bits/s/Hz per 3 dB:
/// 2 beta^2 / (-C''(0)) with C'' in nats, where -C''(0) is the second moment
/// of the effective SINR expansion for each scheme.
inline double low_snr_slope(const SchemeSpec& s, double beta) {
  require_supported(s);
  detail::check_beta(beta);
  const bool fading = s.fading == Fading::Rayleigh;
  if (s.detector == Detector::Optimum) {
    return fading ? 2.0 * beta / (beta + 2.0) : 2.0 * beta / (beta + 1.0);
  }
  return fading ? beta / (1.0 + beta) : 2.0 * beta / (2.0 * beta + 1.0);
}

/// High-SNR slope, bits/s/Hz per 3 dB.
inline double high_snr_slope(const SchemeSpec& s, double beta) {
  require_supported(s);
  detail::check_beta(beta);
  if (s.spreading == Spreading::OneSparse) {
    if (s.detector == Detector::Optimum) return -std::expm1(-beta);
    return beta * std::exp(-beta);
  }
  if (s.detector == Detector::Optimum) return std::min(beta, 1.0);
  if (beta < 1.0) return beta;
  if (beta == 1.0) return 0.5;
  return 0.0;
}

/// E_b/N_0 (linear) at SNR gamma: eta = gamma beta / C(beta, gamma).
inline double eta_from_gamma(const SchemeSpec& s, double beta, double gamma,
                             const Tolerance& tol = {}) {
  require_supported(s);
  if (!(gamma > 0.0)) throw DegenerateRate("E_b/N_0 is undefined at gamma = 0");
  const double c = spectral_efficiency(s, {beta, gamma, std::nullopt}, tol).bits_per_dim;
  if (!(c > 0.0)) throw DegenerateRate("spectral efficiency is zero; E_b/N_0 undefined");
  return gamma * beta / c;
}

/// SNR gamma at which the scheme operates with E_b/N_0 = eta (linear), i.e.
/// the root of gamma beta = C(beta, gamma) eta, searched in log gamma.
inline double gamma_from_eta(const SchemeSpec& s, double beta, double eta,
                             const Tolerance& tol = {}) {
  require_supported(s);
  detail::check_beta(beta);
  if (!(eta > kLn2) || !std::isfinite(eta)) {
    throw NoSolution("E_b/N_0 must exceed ln 2 (-1.5917 dB), the minimum energy per bit");
  }
  const double log_eta = std::log(eta);
  auto h = [&](double u) { return std::log(eta_from_gamma(s, beta, std::exp(u), tol)) - log_eta; };
  constexpr double step = 2.302585092994046;  // one decade
  double lo = 0.0;
  double hi = 0.0;
  double h_lo = h(lo);
  if (h_lo >= 0.0) {
    hi = lo;
    do {
      lo -= step;
      if (lo < -600.0) throw NonConvergence("gamma_from_eta: no lower bracket found");
      h_lo = h(lo);
    } while (h_lo >= 0.0);
    hi = lo + step;
  } else {
    double h_hi = h_lo;
    do {
      hi += step;
      if (hi > 600.0) throw NonConvergence("gamma_from_eta: no upper bracket found");
      h_hi = h(hi);
    } while (h_hi < 0.0);
    lo = hi - step;
  }
  const Tolerance root_tol{1e-14, 1e-13, std::max<std::int64_t>(tol.max_evals, 400)};
  const double u = find_root_bracketed(h, lo, hi, root_tol);
  return std::exp(u);
}

}  // namespace noma
