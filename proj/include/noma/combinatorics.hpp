#pragma once

// Exact Lah, Stirling (second kind) and Narayana numbers, and the moment
// polynomials of the three limiting spectral laws they generate.

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "noma/error.hpp"

namespace noma {

/// Overflow-checked 512-bit unsigned integer; 64! < 2^297.
using BigUint = boost::multiprecision::checked_uint512_t;

inline constexpr int kMaxMomentOrder = 64;

enum class EnsembleKind { DsNoFading, LdsNoFading, LdsFading };

inline std::string_view to_string(EnsembleKind kind) {
  switch (kind) {
    case EnsembleKind::DsNoFading: return "ds-nofading";
    case EnsembleKind::LdsNoFading: return "lds-nofading";
    case EnsembleKind::LdsFading: return "lds-fading";
  }
  return "?";
}

inline EnsembleKind parse_ensemble(std::string_view name) {
  if (name == "ds-nofading") return EnsembleKind::DsNoFading;
  if (name == "lds-nofading") return EnsembleKind::LdsNoFading;
  if (name == "lds-fading") return EnsembleKind::LdsFading;
  throw DomainError("unknown ensemble '" + std::string(name) +
                    "' (expected ds-nofading, lds-nofading or lds-fading)");
}

/// Moments m_1..m_L of a spectral distribution at load `beta`.
struct MomentVector {
  double beta = 0.0;
  std::vector<int> orders;
  std::vector<double> values;
};

namespace detail {

inline void check_order(int L, int l) {
  if (L < 1 || l < 1 || l > L) {
    throw DomainError("combinatorial index out of range: need 1 <= l <= L");
  }
  if (L > kMaxMomentOrder) {
    throw OverflowError("combinatorial order L=" + std::to_string(L) +
                        " exceeds the exact range L <= 64");
  }
}

template <class Fn>
BigUint checked(Fn&& fn) {
  try {
    return fn();
  } catch (const std::overflow_error& e) {
    throw OverflowError(std::string("exact integer overflow: ") + e.what());
  }
}

inline BigUint falling_product(int from_exclusive, int to_inclusive) {
  BigUint p = 1;
  for (int j = from_exclusive + 1; j <= to_inclusive; ++j) p *= j;
  return p;
}

inline BigUint binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  BigUint c = 1;
  for (int j = 1; j <= k; ++j) {
    c *= n - k + j;
    c /= j;
  }
  return c;
}

}  // namespace detail

/// Unsigned Lah number C(L-1, l-1) * L! / l!.
inline BigUint lah(int L, int l) {
  detail::check_order(L, l);
  return detail::checked([&] {
    return detail::binomial(L - 1, l - 1) * detail::falling_product(l, L);
  });
}

/// Stirling number of the second kind, by the triangular recurrence
/// S(n, k) = k S(n-1, k) + S(n-1, k-1).
inline BigUint stirling2(int L, int l) {
  detail::check_order(L, l);
  return detail::checked([&] {
    std::vector<BigUint> row(L + 1, 0);
    row[0] = 1;
    for (int n = 1; n <= L; ++n) {
      for (int k = std::min(n, l); k >= 1; --k) {
        row[k] = k * row[k] + row[k - 1];
      }
      row[0] = 0;
    }
    return row[l];
  });
}

/// Narayana number C(L, l) C(L, l-1) / L.
inline BigUint narayana(int L, int l) {
  detail::check_order(L, l);
  return detail::checked([&] {
    return detail::binomial(L, l) * detail::binomial(L, l - 1) / L;
  });
}

/// Coefficient of beta^l in the L-th moment of the ensemble's limiting law.
inline BigUint moment_coefficient(EnsembleKind kind, int L, int l) {
  switch (kind) {
    case EnsembleKind::DsNoFading: return narayana(L, l);
    case EnsembleKind::LdsNoFading: return stirling2(L, l);
    case EnsembleKind::LdsFading: return lah(L, l);
  }
  throw DomainError("unknown ensemble");
}

inline std::vector<BigUint> moment_coefficients(EnsembleKind kind, int L) {
  std::vector<BigUint> row;
  row.reserve(L);
  for (int l = 1; l <= L; ++l) row.push_back(moment_coefficient(kind, L, l));
  return row;
}

/// L-th moment of the limiting spectral law: sum_l coeff(L, l) beta^l.
/// Marcenko-Pastur (Narayana), Poisson (Stirling), compound Poisson (Lah).
inline double lsd_moment(EnsembleKind kind, int L, double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw DomainError("lsd_moment requires finite beta > 0");
  }
  detail::check_order(L, 1);
  double m = 0.0;
  double power = 1.0;
  for (int l = 1; l <= L; ++l) {
    power *= beta;
    m += moment_coefficient(kind, L, l).convert_to<double>() * power;
  }
  return m;
}

inline MomentVector lsd_moments(EnsembleKind kind, int l_max, double beta) {
  MomentVector mv{beta, {}, {}};
  for (int L = 1; L <= l_max; ++L) {
    mv.orders.push_back(L);
    mv.values.push_back(lsd_moment(kind, L, beta));
  }
  return mv;
}

/// True iff the even Lah moments obey m_{2k} < ((2k-1)(1+beta))^{2k} for all
/// k <= k_max, the bound that makes the moment sequence satisfy Carleman's
/// condition. Compared in log space so large beta cannot overflow.
inline bool carleman_bound_holds(double beta, int k_max) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw DomainError("carleman_bound_holds requires finite beta > 0");
  }
  if (k_max < 1 || 2 * k_max > kMaxMomentOrder) {
    throw DomainError("carleman_bound_holds requires 1 <= k_max <= 32");
  }
  const double log_beta = std::log(beta);
  for (int k = 1; k <= k_max; ++k) {
    const int L = 2 * k;
    // log-sum-exp over l of log(lah) + l log(beta)
    std::vector<double> logs;
    double top = -INFINITY;
    for (int l = 1; l <= L; ++l) {
      const double t = std::log(lah(L, l).convert_to<double>()) + l * log_beta;
      logs.push_back(t);
      top = std::max(top, t);
    }
    double acc = 0.0;
    for (double t : logs) acc += std::exp(t - top);
    const double log_moment = top + std::log(acc);
    const double log_bound = L * std::log((2.0 * k - 1.0) * (1.0 + beta));
    if (!(log_moment < log_bound)) return false;
  }
  return true;
}

}  // namespace noma
