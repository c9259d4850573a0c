#pragma once

// Finite-size Monte Carlo for the 1-sparse and dense spreading ensembles.
// With 1-sparse signatures the Gram matrix S A A* S* is diagonal, so its
// eigenvalues are the per-dimension received powers and no matrix is formed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "noma/combinatorics.hpp"
#include "noma/error.hpp"
#include "noma/numerics.hpp"
#include "noma/parallel.hpp"
#include "noma/random.hpp"

namespace noma {

/// One realization of the 1-sparse system. Positions are 1-based chip indices.
struct SystemDraw {
  std::int64_t n_dims = 0;
  std::int64_t n_users = 0;
  std::vector<std::int64_t> positions;
  std::vector<int> signs;
  std::vector<double> fade_powers;
};

/// Diagonal of S A A* S*, i.e. its full eigenvalue multiset.
struct GramDiagonal {
  std::vector<double> values;
  double load = 0.0;  // realized K / N
};

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t n_samples = 0;
  std::uint64_t seed = 0;
};

enum class DenseEntries { Binary, Gaussian };

namespace detail {

inline void require_positive_size(std::int64_t v, const char* what) {
  if (v < 1) throw SizeError(std::string(what) + " must be >= 1");
}

inline void require_beta(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("beta must be finite and > 0");
}

inline void require_gamma(double gamma) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw DomainError("gamma must be finite and >= 0");
}

/// K = round(beta N), at least one user.
inline std::int64_t user_count(std::int64_t n_dims, double beta) {
  const auto k = std::llround(beta * static_cast<double>(n_dims));
  if (k < 1) throw SizeError("round(beta * N) is zero; increase N or beta");
  return k;
}

inline McEstimate to_estimate(const RunningStats& s, std::uint64_t seed, double scale = 1.0) {
  return {scale * s.mean, scale * s.std_error(), s.count, seed};
}

}  // namespace detail

/// Positions, signs and Exp(1) fade powers; user k reads substream k of
/// stream `draw_index`.
inline SystemDraw draw_system(std::int64_t n_dims, std::int64_t n_users, std::uint64_t seed,
                              std::uint64_t draw_index = 0) {
  detail::require_positive_size(n_dims, "n_dims");
  detail::require_positive_size(n_users, "n_users");
  if (n_users > 0xFFFFFFFFLL) throw SizeError("n_users exceeds 2^32 - 1");
  SystemDraw d;
  d.n_dims = n_dims;
  d.n_users = n_users;
  d.positions.resize(n_users);
  d.signs.resize(n_users);
  d.fade_powers.resize(n_users);
  for (std::int64_t k = 0; k < n_users; ++k) {
    CounterRng rng(seed, draw_index, static_cast<std::uint32_t>(k));
    d.positions[k] = 1 + static_cast<std::int64_t>(rng.uniform_int(static_cast<std::uint64_t>(n_dims)));
    d.signs[k] = rng.sign();
    d.fade_powers[k] = rng.exponential();
  }
  return d;
}

inline GramDiagonal gram_diagonal(const SystemDraw& d) {
  GramDiagonal g;
  g.values.assign(static_cast<std::size_t>(std::max<std::int64_t>(d.n_dims, 0)), 0.0);
  for (std::size_t k = 0; k < d.fade_powers.size(); ++k) {
    g.values[static_cast<std::size_t>(d.positions[k] - 1)] += d.fade_powers[k];
  }
  g.load = d.n_dims > 0 ? static_cast<double>(d.n_users) / static_cast<double>(d.n_dims) : 0.0;
  return g;
}

/// m_L = (1/N) sum_i S_i^L for L = 1..l_max.
inline MomentVector empirical_moments(const GramDiagonal& g, int l_max) {
  if (l_max < 1) throw DomainError("l_max must be >= 1");
  if (g.values.empty()) throw SizeError("empty Gram diagonal");
  std::vector<CompensatedSum> sums(l_max);
  for (double s : g.values) {
    double p = 1.0;
    for (int l = 0; l < l_max; ++l) {
      p *= s;
      sums[l].add(p);
    }
  }
  MomentVector mv{g.load, {}, {}};
  const double n = static_cast<double>(g.values.size());
  for (int l = 0; l < l_max; ++l) {
    mv.orders.push_back(l + 1);
    mv.values.push_back(sums[l].value() / n);
  }
  return mv;
}

/// (1/N) log2 det(I + gamma S A A* S*) = (1/N) sum_i log2(1 + gamma S_i).
inline double empirical_opt_se(const GramDiagonal& g, double gamma) {
  detail::require_gamma(gamma);
  if (g.values.empty()) throw SizeError("empty Gram diagonal");
  CompensatedSum acc;
  for (double s : g.values) acc.add(std::log1p(gamma * s));
  return acc.value() / (static_cast<double>(g.values.size()) * std::numbers::ln2);
}

/// Compound Poisson law: Poisson(beta) many Exp(1) summands. Atom e^{-beta}
/// at zero, Gamma(k, 1) component with Poisson weight for each k >= 1.
class LsdMixture {
 public:
  explicit LsdMixture(double beta) : beta_(beta) {
    detail::require_beta(beta);
    atom_ = std::exp(-beta);
    double w = atom_;
    for (int k = 1; k <= kPoissonHardCap; ++k) {
      w *= beta / k;
      weights_.push_back(w);
      if (k > beta && poisson_upper_tail_bound(beta, k + 1) < 1e-17) break;
    }
  }

  [[nodiscard]] double beta() const { return beta_; }
  [[nodiscard]] double atom_weight() const { return atom_; }
  /// Entry k-1 is the weight of the Gamma(k, 1) component.
  [[nodiscard]] const std::vector<double>& component_weights() const { return weights_; }

  [[nodiscard]] double total_mass() const {
    CompensatedSum acc;
    acc.add(atom_);
    for (double w : weights_) acc.add(w);
    return acc.value();
  }

  [[nodiscard]] double cdf(double lambda) const {
    if (std::isnan(lambda)) throw DomainError("cdf of NaN");
    if (lambda < 0.0) return 0.0;
    CompensatedSum acc;
    acc.add(atom_);
    if (lambda > 0.0) {
      for (std::size_t k = 0; k < weights_.size(); ++k) {
        acc.add(weights_[k] * reg_lower_gamma(static_cast<int>(k + 1), lambda));
      }
    }
    return std::min(1.0, acc.value());
  }

  [[nodiscard]] double sample(CounterRng& rng) const {
    const auto j = rng.poisson(beta_);
    double s = 0.0;
    for (std::uint64_t i = 0; i < j; ++i) s += rng.exponential();
    return s;
  }

 private:
  double beta_;
  double atom_ = 0.0;
  std::vector<double> weights_;
};

/// Kolmogorov-Smirnov distance sup |F_N - F| between the empirical spectral
/// distribution and the mixture, checked at both sides of every jump.
inline double empirical_lsd_cdf_distance(const GramDiagonal& g, const LsdMixture& m) {
  if (g.values.empty()) throw SizeError("empty Gram diagonal");
  std::vector<double> v = g.values;
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double dist = 0.0;
  std::size_t i = 0;
  while (i < v.size()) {
    std::size_t j = i;
    while (j < v.size() && v[j] == v[i]) ++j;
    const double f = m.cdf(v[i]);
    const double below = static_cast<double>(i) / n;
    const double at = static_cast<double>(j) / n;
    // Left limit of the mixture CDF differs from f only at the atom.
    const double f_left = v[i] == 0.0 ? 0.0 : f;
    dist = std::max({dist, std::abs(at - f), std::abs(below - f_left)});
    i = j;
  }
  return dist;
}

/// SUMF rate of one user by Monte Carlo: per sample, the own fade, the number
/// of colliding users M ~ Binomial(K-1, 1/N) and their summed fades. `mean`
/// and `std_error` are already scaled by beta (bits per dimension).
inline McEstimate mc_sumf_rate(std::int64_t n_dims, double beta, double gamma,
                               std::int64_t n_samples, std::uint64_t seed) {
  detail::require_positive_size(n_dims, "n_dims");
  detail::require_positive_size(n_samples, "n_samples");
  detail::require_beta(beta);
  detail::require_gamma(gamma);
  const std::int64_t k_users = detail::user_count(n_dims, beta);
  if (gamma == 0.0) return {0.0, 0.0, n_samples, seed};
  const double p = 1.0 / static_cast<double>(n_dims);
  const auto others = static_cast<std::uint64_t>(k_users - 1);
  const auto stats = chunked_stats(n_samples, [&](std::int64_t i) {
    CounterRng rng(seed, static_cast<std::uint64_t>(i));
    const double own = rng.exponential();
    const auto m = rng.binomial(others, p);
    double interference = 0.0;
    for (std::uint64_t j = 0; j < m; ++j) interference += rng.exponential();
    return std::log1p(own * gamma / (1.0 + gamma * interference)) / std::numbers::ln2;
  });
  return detail::to_estimate(stats, seed, beta);
}

/// (1/N) log2 det(I + gamma S A A* S*) for dense N x K spreading with entries
/// of variance 1/N and Rayleigh fades, averaged over trials. Each trial is
/// factored by Cholesky; a failed factorization is reported, never patched.
inline McEstimate mc_ds_fading_logdet(std::int64_t n_dims, double beta, double gamma,
                                      std::int64_t n_trials, std::uint64_t seed,
                                      DenseEntries entries = DenseEntries::Binary) {
  detail::require_positive_size(n_dims, "n_dims");
  detail::require_positive_size(n_trials, "n_trials");
  if (n_dims > 2048) throw SizeError("n_dims must be <= 2048 for dense log-det");
  detail::require_beta(beta);
  detail::require_gamma(gamma);
  const std::int64_t k_users = detail::user_count(n_dims, beta);
  if (gamma == 0.0) return {0.0, 0.0, n_trials, seed};
  const double amplitude = 1.0 / std::sqrt(static_cast<double>(n_dims));
  std::vector<double> per_trial(static_cast<std::size_t>(n_trials));
  parallel_for(per_trial.size(), [&](std::size_t t) {
    Eigen::MatrixXd m(n_dims, k_users);
    for (std::int64_t k = 0; k < k_users; ++k) {
      CounterRng rng(seed, t, static_cast<std::uint32_t>(k));
      const double re = rng.normal();
      const double im = rng.normal();
      const double fade = std::sqrt(0.5 * (re * re + im * im));
      for (std::int64_t i = 0; i < n_dims; ++i) {
        const double chip = entries == DenseEntries::Binary ? rng.sign() * amplitude
                                                            : rng.normal() * amplitude;
        m(i, k) = chip * fade;
      }
    }
    Eigen::MatrixXd gram = Eigen::MatrixXd::Identity(n_dims, n_dims);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(m, gamma);
    Eigen::LLT<Eigen::MatrixXd, Eigen::Lower> llt(gram);
    if (llt.info() != Eigen::Success) {
      throw FactorizationFailure("Cholesky factorization failed in trial " + std::to_string(t));
    }
    const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    per_trial[t] = logdet / (static_cast<double>(n_dims) * std::numbers::ln2);
  });
  RunningStats stats;
  for (double v : per_trial) stats.add(v);
  return detail::to_estimate(stats, seed);
}

/// Pearson correlation of the received powers S_1, S_2 of two fixed chips
/// across independent draws. Occupancies come from the multinomial law via
/// K_1 ~ Bin(K, 1/N) and K_2 | K_1 ~ Bin(K - K_1, 1/(N-1)).
inline double independence_diagnostic(std::int64_t n_dims, double beta, std::int64_t n_draws,
                                       std::uint64_t seed) {
  if (n_dims < 2) throw SizeError("independence diagnostic needs n_dims >= 2");
  detail::require_positive_size(n_draws, "n_draws");
  if (n_draws < 2) throw SizeError("independence diagnostic needs n_draws >= 2");
  detail::require_beta(beta);
  const auto k_users = static_cast<std::uint64_t>(detail::user_count(n_dims, beta));
  const double p1 = 1.0 / static_cast<double>(n_dims);
  const double p2 = 1.0 / static_cast<double>(n_dims - 1);
  constexpr std::int64_t kChunk = 1 << 14;
  struct Pair {
    RunningStats x, y;
    double cross = 0.0;  // sum of (x - mean_x)(y - mean_y), merged like m2
  };
  const auto n_chunks = static_cast<std::size_t>((n_draws + kChunk - 1) / kChunk);
  std::vector<Pair> partial(n_chunks);
  parallel_for(n_chunks, [&](std::size_t c) {
    Pair acc;
    const std::int64_t begin = static_cast<std::int64_t>(c) * kChunk;
    const std::int64_t end = std::min(n_draws, begin + kChunk);
    for (std::int64_t d = begin; d < end; ++d) {
      CounterRng rng(seed, static_cast<std::uint64_t>(d));
      const auto k1 = rng.binomial(k_users, p1);
      const auto k2 = rng.binomial(k_users - k1, p2);
      double s1 = 0.0;
      double s2 = 0.0;
      for (std::uint64_t j = 0; j < k1; ++j) s1 += rng.exponential();
      for (std::uint64_t j = 0; j < k2; ++j) s2 += rng.exponential();
      const double dx = s1 - acc.x.mean;
      acc.x.add(s1);
      acc.y.add(s2);
      acc.cross += dx * (s2 - acc.y.mean);
    }
    partial[c] = acc;
  });
  Pair total;
  for (const auto& p : partial) {
    if (p.x.count == 0) continue;
    if (total.x.count > 0) {
      const double na = static_cast<double>(total.x.count);
      const double nb = static_cast<double>(p.x.count);
      total.cross += p.cross + (p.x.mean - total.x.mean) * (p.y.mean - total.y.mean) * na * nb / (na + nb);
    } else {
      total.cross = p.cross;
    }
    total.x.merge(p.x);
    total.y.merge(p.y);
  }
  const double denom = std::sqrt(total.x.m2 * total.y.m2);
  if (!(denom > 0.0)) return 0.0;
  return total.cross / denom;
}

}  // namespace noma
