#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "noma/error.hpp"

namespace noma {

enum class Spreading { Dense, OneSparse };
enum class Fading { None, Rayleigh };
enum class Detector { Sumf, Mmse, Zf, Optimum };

/// Selects one spectral-efficiency formula. Canonical name grammar:
/// `<lds|ds>-<sumf|mmse|zf|opt>-<fading|nofading>`; the fading token may be
/// omitted on input and then means `nofading`.
struct SchemeSpec {
  Spreading spreading = Spreading::OneSparse;
  Fading fading = Fading::None;
  Detector detector = Detector::Optimum;

  friend bool operator==(const SchemeSpec&, const SchemeSpec&) = default;
};

inline std::string_view to_string(Detector d) {
  switch (d) {
    case Detector::Sumf: return "sumf";
    case Detector::Mmse: return "mmse";
    case Detector::Zf: return "zf";
    case Detector::Optimum: return "opt";
  }
  return "?";
}

inline std::string to_string(const SchemeSpec& s) {
  std::string name = s.spreading == Spreading::OneSparse ? "lds-" : "ds-";
  name += to_string(s.detector);
  name += s.fading == Fading::Rayleigh ? "-fading" : "-nofading";
  return name;
}

/// Whether a formula exists for the combination. Linear detectors with LDS
/// and fading are SUMF only; DS linear detection is MMSE only.
inline bool is_supported(const SchemeSpec& s) {
  if (s.detector == Detector::Optimum) return true;
  if (s.spreading == Spreading::OneSparse) {
    return s.fading == Fading::None || s.detector == Detector::Sumf;
  }
  return s.detector == Detector::Mmse;
}

inline void require_supported(const SchemeSpec& s) {
  if (!is_supported(s)) {
    throw UnsupportedScheme("no spectral-efficiency formula for scheme " + to_string(s));
  }
}

inline SchemeSpec parse_scheme(std::string_view name) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto dash = name.find('-', start);
    parts.push_back(name.substr(start, dash - start));
    if (dash == std::string_view::npos) break;
    start = dash + 1;
  }
  auto fail = [&]() -> SchemeSpec {
    throw DomainError("cannot parse scheme '" + std::string(name) +
                      "' (expected <lds|ds>-<sumf|mmse|zf|opt>[-<fading|nofading>])");
  };
  if (parts.size() < 2 || parts.size() > 3) return fail();
  SchemeSpec s;
  if (parts[0] == "lds") {
    s.spreading = Spreading::OneSparse;
  } else if (parts[0] == "ds") {
    s.spreading = Spreading::Dense;
  } else {
    return fail();
  }
  if (parts[1] == "sumf") {
    s.detector = Detector::Sumf;
  } else if (parts[1] == "mmse") {
    s.detector = Detector::Mmse;
  } else if (parts[1] == "zf") {
    s.detector = Detector::Zf;
  } else if (parts[1] == "opt") {
    s.detector = Detector::Optimum;
  } else {
    return fail();
  }
  s.fading = Fading::None;
  if (parts.size() == 3) {
    if (parts[2] == "fading") {
      s.fading = Fading::Rayleigh;
    } else if (parts[2] != "nofading") {
      return fail();
    }
  }
  return s;
}

/// The eight distinct formulas (LDS no-fading MMSE/ZF alias SUMF).
inline std::vector<SchemeSpec> all_formula_schemes() {
  using enum Spreading;
  using enum Detector;
  return {
      {OneSparse, Fading::None, Optimum}, {OneSparse, Fading::None, Sumf},
      {OneSparse, Fading::Rayleigh, Optimum}, {OneSparse, Fading::Rayleigh, Sumf},
      {Dense, Fading::None, Optimum},     {Dense, Fading::None, Mmse},
      {Dense, Fading::Rayleigh, Optimum}, {Dense, Fading::Rayleigh, Mmse},
  };
}

}  // namespace noma
