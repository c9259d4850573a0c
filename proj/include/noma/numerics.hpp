#pragma once

// Numerical substrate: exponential integrals, the regularized lower incomplete
// gamma function for integer order, adaptive Gauss-Kronrod quadrature,
// Poisson-weighted series with certified truncation, and bracketed root
// finding.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "noma/error.hpp"

namespace noma {

struct Tolerance {
  double rel = 1e-10;
  double abs = 1e-12;
  std::int64_t max_evals = 200'000;

  void validate() const {
    if (!(rel > 0.0) || !(abs >= 0.0) || max_evals < 16) {
      throw DomainError("Tolerance requires rel > 0, abs >= 0, max_evals >= 16");
    }
  }
};

struct QuadResult {
  double value = 0.0;
  double err_estimate = 0.0;
  std::int64_t evals = 0;
};

/// Neumaier's compensated summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) {
    add(x);
    return *this;
  }
  [[nodiscard]] double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// ---------------------------------------------------------------------------
// Exponential integrals
// ---------------------------------------------------------------------------

namespace detail {

inline constexpr double kEulerGamma = 0.57721566490153286060651209008240243;

inline void check_expint_args(int n, double x) {
  if (n < 1) throw DomainError("exponential integral: order must be >= 1");
  if (!std::isfinite(x) || !(x > 0.0)) {
    throw DomainError("exponential integral: argument must be finite and > 0");
  }
}

// Power series for E_n(x), valid (and used) for 0 < x <= 1.
inline double expint_series(int n, double x) {
  const int nm1 = n - 1;
  double ans = (nm1 != 0) ? 1.0 / nm1 : -std::log(x) - kEulerGamma;
  double fact = 1.0;
  for (int i = 1; i < 10'000; ++i) {
    fact *= -x / i;
    double del;
    if (i != nm1) {
      del = -fact / (i - nm1);
    } else {
      double psi = -kEulerGamma;
      for (int ii = 1; ii <= nm1; ++ii) psi += 1.0 / ii;
      del = fact * (-std::log(x) + psi);
    }
    ans += del;
    if (std::abs(del) < std::abs(ans) * 1e-17) return ans;
  }
  throw NonConvergence("exponential integral series did not converge");
}

// Modified Lentz evaluation of the continued fraction for e^x E_n(x), x > 1.
inline double expint_scaled_cf(int n, double x) {
  constexpr double tiny = 1e-300;
  double b = x + n;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 100'000; ++i) {
    const double an = -static_cast<double>(i) * (n - 1 + i);
    b += 2.0;
    d = 1.0 / (an * d + b);
    c = b + an / c;
    const double del = c * d;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) return h;
  }
  throw NonConvergence("exponential integral continued fraction did not converge");
}

}  // namespace detail

/// E_n(x) = int_1^inf t^-n e^{-xt} dt for n >= 1, x > 0.
inline double exp_integral_en(int n, double x) {
  detail::check_expint_args(n, x);
  if (x <= 1.0) return detail::expint_series(n, x);
  return detail::expint_scaled_cf(n, x) * std::exp(-x);
}

inline double exp_integral_e1(double x) { return exp_integral_en(1, x); }

/// e^x E_n(x). Stays finite (~1/(x+n)) where E_n itself underflows.
inline double scaled_exp_integral_en(int n, double x) {
  detail::check_expint_args(n, x);
  if (x <= 1.0) return detail::expint_series(n, x) * std::exp(x);
  return detail::expint_scaled_cf(n, x);
}

// ---------------------------------------------------------------------------
// Incomplete gamma
// ---------------------------------------------------------------------------

/// Regularized lower incomplete gamma P(k, x) for integer k >= 1.
inline double reg_lower_gamma(int k, double x) {
  if (k < 1 || std::isnan(x) || x < 0.0) {
    throw DomainError("reg_lower_gamma requires k >= 1 and x >= 0");
  }
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < k + 1.0) {
    // P = e^-x x^k / k! * sum_j x^j / ((k+1)...(k+j))
    double term = 1.0;
    double sum = 1.0;
    for (int j = 1; j < 100'000; ++j) {
      term *= x / (k + j);
      sum += term;
      if (term < sum * 1e-17) break;
    }
    const double log_pref = k * std::log(x) - x - std::lgamma(k + 1.0);
    return std::min(1.0, std::exp(log_pref) * sum);
  }
  // Q = e^-x sum_{j<k} x^j / j!, every term positive.
  CompensatedSum q;
  const double lx = std::log(x);
  for (int j = 0; j < k; ++j) {
    q += std::exp(j * lx - x - std::lgamma(j + 1.0));
  }
  return std::clamp(1.0 - q.value(), 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

namespace detail {

struct Panel {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

// 15-point Kronrod rule with the embedded 7-point Gauss rule; error estimate
// follows the QUADPACK QK15 heuristic.
template <class F>
Panel gauss_kronrod15(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double res_k = fc * kKronrodWeights[7];
  double res_g = fc * kGaussWeights[3];
  double res_abs = std::abs(res_k);
  std::array<double, 7> f1{};
  std::array<double, 7> f2{};
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    f1[j] = f(center - dx);
    f2[j] = f(center + dx);
    const double sum = f1[j] + f2[j];
    res_k += kKronrodWeights[j] * sum;
    res_abs += kKronrodWeights[j] * (std::abs(f1[j]) + std::abs(f2[j]));
    if (j % 2 == 1) res_g += kGaussWeights[j / 2] * sum;
  }
  const double mean = 0.5 * res_k;
  double res_asc = kKronrodWeights[7] * std::abs(fc - mean);
  for (int j = 0; j < 7; ++j) {
    res_asc += kKronrodWeights[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));
  }
  const double abs_half = std::abs(half);
  res_asc *= abs_half;
  res_abs *= abs_half;
  double err = std::abs((res_k - res_g) * half);
  if (res_asc != 0.0 && err != 0.0) {
    err = res_asc * std::min(1.0, std::pow(200.0 * err / res_asc, 1.5));
  }
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (res_abs > std::numeric_limits<double>::min() / (50.0 * eps)) {
    err = std::max(50.0 * eps * res_abs, err);
  }
  if (!std::isfinite(res_k) || !std::isfinite(err)) {
    throw NonConvergence("quadrature: integrand produced a non-finite value");
  }
  return {a, b, res_k * half, err};
}

// Globally adaptive bisection: always split the panel with the largest error.
template <class F>
QuadResult adaptive_quadrature(F& f, std::span<const double> breaks, const Tolerance& tol) {
  tol.validate();
  constexpr std::int64_t evals_per_panel = 15;
  std::priority_queue<Panel> heap;
  std::vector<Panel> frozen;
  std::int64_t evals = 0;
  double total = 0.0;
  double total_err = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (!(breaks[i + 1] > breaks[i])) continue;
    Panel p = gauss_kronrod15(f, breaks[i], breaks[i + 1]);
    evals += evals_per_panel;
    total += p.value;
    total_err += p.error;
    heap.push(p);
  }
  auto finish = [&]() {
    CompensatedSum value;
    double err = 0.0;
    auto drain = heap;
    while (!drain.empty()) {
      value += drain.top().value;
      err += drain.top().error;
      drain.pop();
    }
    for (const auto& p : frozen) {
      value += p.value;
      err += p.error;
    }
    return QuadResult{value.value(), err, evals};
  };
  while (true) {
    if (total_err <= std::max(tol.abs, tol.rel * std::abs(total))) {
      QuadResult exact = finish();
      if (exact.err_estimate <= std::max(tol.abs, tol.rel * std::abs(exact.value))) {
        return exact;
      }
      total = exact.value;
      total_err = exact.err_estimate;
    }
    if (heap.empty()) {
      throw NonConvergence("quadrature: roundoff prevents reaching the requested tolerance");
    }
    if (evals + 2 * evals_per_panel > tol.max_evals) {
      throw NonConvergence("quadrature: evaluation budget exhausted (err " +
                           std::to_string(total_err) + ")");
    }
    const Panel worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b) ||
        (worst.b - worst.a) < 64.0 * std::numeric_limits<double>::epsilon() *
                                  std::max(std::abs(worst.a), std::abs(worst.b))) {
      frozen.push_back(worst);
      continue;
    }
    const Panel left = gauss_kronrod15(f, worst.a, mid);
    const Panel right = gauss_kronrod15(f, mid, worst.b);
    evals += 2 * evals_per_panel;
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
}

}  // namespace detail

/// Adaptive quadrature of f over [a, b]. Optional interior break points seed
/// the initial partition (useful when f has features much narrower than b-a).
template <class F>
QuadResult integrate(F&& f, double a, double b, const Tolerance& tol = {},
                     std::span<const double> breaks = {}) {
  if (!(a <= b) || !std::isfinite(a) || !std::isfinite(b)) {
    throw DomainError("integrate: need finite a <= b");
  }
  std::vector<double> points{a};
  for (double x : breaks) {
    if (x > a && x < b) points.push_back(x);
  }
  points.push_back(b);
  std::sort(points.begin(), points.end());
  if (a == b) return {0.0, 0.0, 0};
  return detail::adaptive_quadrature(f, points, tol);
}

/// Adaptive quadrature of f over [0, inf). The domain is split at `scale`;
/// [0, scale] is integrated directly and the tail through
/// z = scale * (1 + u / (1 - u)), u in [0, 1). Pass a scale comparable to the
/// width of the integrand's main feature.
template <class F>
QuadResult integrate_semi_infinite(F&& f, const Tolerance& tol = {}, double scale = 1.0) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw DomainError("integrate_semi_infinite: scale must be finite and > 0");
  }
  // t in [0,1] covers z in [0,scale]; t in [1,2) is the mapped tail.
  auto mapped = [&f, scale](double t) -> double {
    if (t <= 1.0) return scale * f(scale * t);
    const double u = t - 1.0;
    const double one_minus = 1.0 - u;
    const double z = scale * (1.0 + u / one_minus);
    const double fz = f(z);
    if (fz == 0.0) return 0.0;
    return fz * scale / (one_minus * one_minus);
  };
  static constexpr std::array<double, 9> breaks = {0.0,  0.25, 0.5,  0.75, 1.0,
                                                   1.25, 1.5,  1.75, 2.0};
  return detail::adaptive_quadrature(mapped, breaks, tol);
}

// ---------------------------------------------------------------------------
// Poisson-weighted series
// ---------------------------------------------------------------------------

/// Chernoff bound on P(J >= k) for J ~ Poisson(beta), valid for k > beta.
inline double poisson_upper_tail_bound(double beta, int k) {
  if (k <= beta) return 1.0;
  return std::exp(-beta + k * (1.0 + std::log(beta / k)));
}

inline constexpr int kPoissonHardCap = 10'000;

/// sum_{k >= 1} e^-beta beta^k / k! * term(k).
///
/// The series is cut at the first K > beta for which the Chernoff tail bound
/// times the growth envelope (growth_bound * log(2 + K) + |term(K)|) falls
/// below tol.abs. term is called with k = 1, 2, ... in order.
template <class Term>
double poisson_weighted_sum(double beta, Term&& term, double term_growth_bound,
                            const Tolerance& tol = {}, int hard_cap = kPoissonHardCap) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw DomainError("poisson_weighted_sum requires finite beta > 0");
  }
  const double log_beta = std::log(beta);
  CompensatedSum sum;
  for (int k = 1; k <= hard_cap; ++k) {
    const double weight = std::exp(-beta + k * log_beta - std::lgamma(k + 1.0));
    const double t = term(k);
    sum += weight * t;
    if (k + 1 > beta) {
      const double envelope = term_growth_bound * std::log(3.0 + k) + std::abs(t);
      if (poisson_upper_tail_bound(beta, k + 1) * envelope < tol.abs) {
        return sum.value();
      }
    }
  }
  throw NonConvergence("poisson_weighted_sum: truncation index exceeded the hard cap");
}

// ---------------------------------------------------------------------------
// Root finding
// ---------------------------------------------------------------------------

/// Root of g in [lo, hi] by Illinois-accelerated regula falsi with bisection
/// fallback. Stops when |g(r)| <= tol.abs or the bracket width is at most
/// tol.rel * |r|.
///
/// If g(lo) and g(hi) share a sign the midpoint is probed once; a zero there
/// is returned and a sign change there narrows the bracket. Otherwise throws
/// BadBracket.
template <class G>
double find_root_bracketed(G&& g, double lo, double hi, const Tolerance& tol = {}) {
  tol.validate();
  if (!(lo <= hi)) std::swap(lo, hi);
  double f_lo = g(lo);
  double f_hi = g(hi);
  std::int64_t evals = 2;
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if (std::signbit(f_lo) == std::signbit(f_hi)) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = g(mid);
    ++evals;
    if (std::abs(f_mid) <= tol.abs) return mid;
    if (std::signbit(f_mid) == std::signbit(f_lo)) {
      throw BadBracket("find_root_bracketed: g(lo) and g(hi) have the same sign");
    }
    hi = mid;
    f_hi = f_mid;
  }
  int side = 0;  // which endpoint was retained last (Illinois bookkeeping)
  double prev_width = hi - lo;
  while (true) {
    const double width = hi - lo;
    double x = lo - f_lo * width / (f_hi - f_lo);
    // Fall back to bisection if the secant stalls or leaves the bracket.
    if (!(x > lo && x < hi) || width > 0.5 * prev_width) {
      x = 0.5 * (lo + hi);
    }
    prev_width = width;
    const double fx = g(x);
    ++evals;
    if (std::abs(fx) <= tol.abs || fx == 0.0) return x;
    if (std::signbit(fx) == std::signbit(f_lo)) {
      lo = x;
      f_lo = fx;
      if (side == -1) f_hi *= 0.5;
      side = -1;
    } else {
      hi = x;
      f_hi = fx;
      if (side == 1) f_lo *= 0.5;
      side = 1;
    }
    const double r = std::abs(f_lo) < std::abs(f_hi) ? lo : hi;
    if (hi - lo <= tol.rel * std::abs(r)) return r;
    if (std::nextafter(lo, hi) >= hi) return r;
    if (evals >= tol.max_evals) {
      throw NonConvergence("find_root_bracketed: evaluation budget exhausted");
    }
  }
}

}  // namespace noma
