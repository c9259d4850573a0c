// noma_limits: spectral-efficiency queries, curve sweeps, moment tables,
// Monte Carlo runs and the verification suite.
//
// Exit codes: 0 success, 1 verification failure, 2 usage or domain error,
// 3 I/O error.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "noma/combinatorics.hpp"
#include "noma/ensemble.hpp"
#include "noma/rates.hpp"
#include "noma/scheme.hpp"
#include "noma/sweep.hpp"
#include "noma/verify.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Writes `text` to `path`, or to stdout when the path is empty or "-".
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  out.close();
  if (!out) throw IoError("write to '" + path + "' failed");
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// rate ----------------------------------------------------------------------

struct RateArgs {
  std::string scheme;
  double beta = 1.0;
  std::optional<double> gamma;
  std::optional<double> eta_db;
};

int run_rate(const RateArgs& a) {
  const auto scheme = noma::parse_scheme(a.scheme);
  noma::require_supported(scheme);
  if (a.gamma.has_value() == a.eta_db.has_value()) {
    throw noma::DomainError("give exactly one of --gamma and --eta-db");
  }
  double gamma = 0.0;
  double eta_db = 0.0;
  if (a.gamma) {
    gamma = *a.gamma;
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw noma::DomainError("gamma must be >= 0");
    // At gamma = 0 the energy per bit takes its limiting value ln 2.
    eta_db = gamma == 0.0 ? noma::linear_to_db(noma::kLn2)
                          : noma::linear_to_db(noma::eta_from_gamma(scheme, a.beta, gamma));
  } else {
    eta_db = *a.eta_db;
    const double eta = noma::db_to_linear(eta_db);
    if (!(eta > noma::kLn2)) {
      throw noma::NoSolution("E_b/N_0 of " + noma::format_number(eta_db) +
                             " dB is below minimum energy per bit (-1.5917 dB)");
    }
    gamma = noma::gamma_from_eta(scheme, a.beta, eta);
  }
  const double rate =
      noma::spectral_efficiency(scheme, {a.beta, gamma, std::nullopt}).bits_per_dim;
  char rate_text[64];
  std::snprintf(rate_text, sizeof rate_text, "%.9f", rate);
  std::cout << "scheme=" << noma::to_string(scheme) << " beta=" << noma::format_number(a.beta)
            << " gamma=" << noma::format_number(gamma)
            << " eta_db=" << noma::format_number(eta_db) << " rate=" << rate_text << '\n';
  return kExitOk;
}

// curve ---------------------------------------------------------------------

struct CurveArgs {
  int figure = 0;
  std::string axis = "load";
  std::string range;
  int points = 41;
  std::string spacing;
  std::optional<double> eta_db;
  std::optional<double> beta;
  std::vector<std::string> schemes;
  std::string out;
};

noma::SweepSpec curve_spec(const CurveArgs& a) {
  if (a.figure != 0) return noma::figure_sweep(a.figure);
  noma::SweepSpec spec;
  if (a.axis == "load") {
    spec.x_axis = noma::SweepAxis::Load;
    spec.fixed_value = a.eta_db.value_or(10.0);
  } else if (a.axis == "eta-db") {
    spec.x_axis = noma::SweepAxis::EbN0Db;
    spec.fixed_value = a.beta.value_or(1.0);
  } else {
    throw noma::DomainError("--axis must be 'load' or 'eta-db'");
  }
  const auto colon = a.range.find(':');
  if (colon == std::string::npos) throw noma::DomainError("--range must be MIN:MAX");
  try {
    spec.x_min = std::stod(a.range.substr(0, colon));
    spec.x_max = std::stod(a.range.substr(colon + 1));
  } catch (const std::exception&) {
    throw noma::DomainError("--range must be MIN:MAX with numeric bounds");
  }
  spec.n_points = a.points;
  const std::string spacing = a.spacing.empty() ? (spec.x_axis == noma::SweepAxis::Load ? "log" : "linear")
                                                : a.spacing;
  if (spacing == "log") {
    spec.spacing = noma::Spacing::Log;
  } else if (spacing == "linear") {
    spec.spacing = noma::Spacing::Linear;
  } else {
    throw noma::DomainError("--spacing must be 'linear' or 'log'");
  }
  if (a.schemes.empty()) {
    spec.schemes = noma::all_formula_schemes();
  } else {
    for (const auto& s : a.schemes) spec.schemes.push_back(noma::parse_scheme(s));
  }
  return spec;
}

int run_curve(const CurveArgs& a) {
  const auto spec = curve_spec(a);
  const auto rows = noma::run_sweep(spec);
  for (const auto& r : rows) {
    if (!r.rate) {
      std::cerr << "warning: x=" << noma::format_number(r.x) << " " << r.scheme << ": " << r.warning
                << '\n';
    }
  }
  std::ostringstream csv;
  noma::write_csv(csv, rows);
  emit(a.out, csv.str());
  return kExitOk;
}

// moments -------------------------------------------------------------------

int run_moments(const std::string& ensemble, double beta, int l_max) {
  const auto kind = noma::parse_ensemble(ensemble);
  if (l_max < 1 || l_max > noma::kMaxMomentOrder) {
    throw noma::DomainError("--l-max must be in [1, 64]");
  }
  std::cout << "ensemble=" << noma::to_string(kind) << " beta=" << noma::format_number(beta) << '\n';
  for (int L = 1; L <= l_max; ++L) {
    std::cout << "L=" << L << " coefficients=";
    const auto row = noma::moment_coefficients(kind, L);
    for (std::size_t l = 0; l < row.size(); ++l) std::cout << (l ? " " : "") << row[l];
    std::cout << " moment=" << noma::format_number(noma::lsd_moment(kind, L, beta)) << '\n';
  }
  return kExitOk;
}

// mc ------------------------------------------------------------------------

struct McArgs {
  std::string kind;
  std::int64_t n = 10'000;
  double beta = 1.0;
  double gamma = 10.0;
  std::int64_t samples = 1'000'000;
  std::int64_t trials = 200;
  std::uint64_t seed = 1;
  std::string entries = "binary";
  std::string out;
};

int run_mc(const McArgs& a) {
  json rec;
  double estimate = 0.0;
  double std_error = 0.0;
  double reference = 0.0;
  std::int64_t count = 0;
  const noma::ChannelPoint p{a.beta, a.gamma, std::nullopt};
  if (a.kind == "esd" || a.kind == "copt") {
    noma::detail::require_positive_size(a.n, "n");
    noma::detail::require_beta(a.beta);
    const auto k = noma::detail::user_count(a.n, a.beta);
    const auto g = noma::gram_diagonal(noma::draw_system(a.n, k, a.seed));
    noma::RunningStats per_dim;
    if (a.kind == "esd") {
      for (double s : g.values) per_dim.add(s);
      reference = a.beta;
      rec["ks_distance"] = noma::empirical_lsd_cdf_distance(g, noma::LsdMixture(a.beta));
    } else {
      noma::detail::require_gamma(a.gamma);
      for (double s : g.values) per_dim.add(std::log2(1.0 + a.gamma * s));
      reference = noma::opt_se_lds_fading(p).bits_per_dim;
    }
    estimate = per_dim.mean;
    std_error = per_dim.std_error();
    count = a.n;
    rec["realized_load"] = g.load;
  } else if (a.kind == "sumf") {
    const auto e = noma::mc_sumf_rate(a.n, a.beta, a.gamma, a.samples, a.seed);
    estimate = e.mean;
    std_error = e.std_error;
    count = e.n_samples;
    reference = noma::sumf_rate_lds_fading(p).bits_per_dim;
  } else if (a.kind == "ds-logdet") {
    noma::DenseEntries entries = noma::DenseEntries::Binary;
    if (a.entries == "gaussian") {
      entries = noma::DenseEntries::Gaussian;
    } else if (a.entries != "binary") {
      throw noma::DomainError("--entries must be 'binary' or 'gaussian'");
    }
    const auto e = noma::mc_ds_fading_logdet(a.n, a.beta, a.gamma, a.trials, a.seed, entries);
    estimate = e.mean;
    std_error = e.std_error;
    count = e.n_samples;
    reference = noma::opt_se_ds_fading(p).bits_per_dim;
  } else if (a.kind == "independence") {
    estimate = noma::independence_diagnostic(a.n, a.beta, a.samples, a.seed);
    std_error = 1.0 / std::sqrt(static_cast<double>(a.samples));
    count = a.samples;
    reference = 0.0;
  } else {
    throw noma::DomainError("unknown mc kind '" + a.kind + "'");
  }
  rec["kind"] = a.kind;
  rec["estimate"] = number_or_null(estimate);
  rec["std_error"] = number_or_null(std_error);
  rec["analytic_reference"] = number_or_null(reference);
  rec["z_score"] = std_error > 0.0 ? number_or_null((estimate - reference) / std_error) : json(nullptr);
  rec["n"] = a.n;
  rec["samples"] = count;
  rec["seed"] = a.seed;
  emit(a.out, rec.dump(2) + "\n");
  return kExitOk;
}

// verify --------------------------------------------------------------------

json report_json(const noma::VerifyReport& r, const std::string& suite) {
  json checks = json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"criterion", c.criterion},
                      {"name", c.name},
                      {"expected", number_or_null(c.expected)},
                      {"observed", number_or_null(c.observed)},
                      {"tolerance", number_or_null(c.tolerance)},
                      {"passed", c.passed}});
  }
  return {{"checks", checks},
          {"overall", r.overall},
          {"seeds", r.seeds},
          {"suite", suite},
          {"wall_time_s", r.wall_time_s}};
}

int run_verify(const std::string& suite, std::uint64_t seed, const std::string& out) {
  const auto report = noma::run_verify(noma::parse_suite(suite), seed);
  for (const auto& c : report.checks) {
    std::cerr << (c.passed ? "PASS " : "FAIL ") << "[" << c.criterion << "] " << c.name << '\n';
  }
  emit(out, report_json(report, suite).dump(2) + "\n");
  return report.overall ? kExitOk : kExitVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral-efficiency limits of low-density and dense spreading NOMA"};
  app.require_subcommand(1);

  RateArgs rate;
  auto* rate_cmd = app.add_subcommand("rate", "Spectral efficiency at one operating point");
  rate_cmd->add_option("--scheme", rate.scheme, "<lds|ds>-<sumf|mmse|zf|opt>[-<fading|nofading>]")
      ->required();
  rate_cmd->add_option("--beta", rate.beta, "Load K/N")->required();
  auto* gamma_opt = rate_cmd->add_option("--gamma", rate.gamma, "SNR (linear)");
  rate_cmd->add_option("--eta-db", rate.eta_db, "E_b/N_0 in dB")->excludes(gamma_opt);

  CurveArgs curve;
  auto* curve_cmd = app.add_subcommand("curve", "Rate curve as CSV");
  curve_cmd->add_option("--figure", curve.figure, "Preset sweep of figure 1-4")
      ->check(CLI::Range(1, 4));
  curve_cmd->add_option("--axis", curve.axis, "load or eta-db");
  curve_cmd->add_option("--range", curve.range, "MIN:MAX of the swept variable");
  curve_cmd->add_option("--points", curve.points, "Number of grid points");
  curve_cmd->add_option("--spacing", curve.spacing, "linear or log");
  curve_cmd->add_option("--eta-db", curve.eta_db, "Fixed E_b/N_0 (dB) for load sweeps");
  curve_cmd->add_option("--beta", curve.beta, "Fixed load for E_b/N_0 sweeps");
  curve_cmd->add_option("--scheme", curve.schemes, "Scheme (repeatable; default all)")
      ->delimiter(',');
  curve_cmd->add_option("--out", curve.out, "Output CSV path (default stdout)");

  std::string ensemble;
  double moments_beta = 1.0;
  int l_max = 4;
  auto* moments_cmd = app.add_subcommand("moments", "Exact moment coefficients and values");
  moments_cmd->add_option("--ensemble", ensemble, "ds-nofading, lds-nofading or lds-fading")
      ->required();
  moments_cmd->add_option("--beta", moments_beta, "Load");
  moments_cmd->add_option("--l-max", l_max, "Highest moment order");

  McArgs mc;
  auto* mc_cmd = app.add_subcommand("mc", "Monte Carlo estimate against the analytic value");
  mc_cmd->add_option("kind", mc.kind, "esd, copt, sumf, ds-logdet or independence")
      ->required()
      ->check(CLI::IsMember({"esd", "copt", "sumf", "ds-logdet", "independence"}));
  mc_cmd->add_option("--n", mc.n, "Signal dimensions N");
  mc_cmd->add_option("--beta", mc.beta, "Load");
  mc_cmd->add_option("--gamma", mc.gamma, "SNR (linear)");
  mc_cmd->add_option("--samples", mc.samples, "Samples (sumf) or draws (independence)");
  mc_cmd->add_option("--trials", mc.trials, "Trials (ds-logdet)");
  mc_cmd->add_option("--seed", mc.seed, "Seed");
  mc_cmd->add_option("--entries", mc.entries, "Dense chip law: binary or gaussian");
  mc_cmd->add_option("--out", mc.out, "Output JSON path (default stdout)");

  std::string suite = "fast";
  std::uint64_t verify_seed = 42;
  std::string verify_out;
  auto* verify_cmd = app.add_subcommand("verify", "Run the acceptance checks");
  verify_cmd->add_option("--suite", suite, "fast or full");
  verify_cmd->add_option("--seed", verify_seed, "Monte Carlo seed");
  verify_cmd->add_option("--out", verify_out, "Report JSON path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*rate_cmd) return run_rate(rate);
    if (*curve_cmd) return run_curve(curve);
    if (*moments_cmd) return run_moments(ensemble, moments_beta, l_max);
    if (*mc_cmd) return run_mc(mc);
    if (*verify_cmd) return run_verify(suite, verify_seed, verify_out);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const noma::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
