#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pfmr {

/// The 14 admissible constraints on the component error covariances,
/// written as volume/shape/orientation letters (E = equal across
/// components, V = variable, I = identity / axis-aligned).
enum class CovarianceStructure {
  EII, VII, EEI, VEI, EVI, VVI,
  EEE, VEE, EVE, VVE,
  EEV, VEV, EVV, VVV,
};

inline constexpr std::array<CovarianceStructure, 14> all_structures = {
  CovarianceStructure::EII, CovarianceStructure::VII, CovarianceStructure::EEI,
  CovarianceStructure::VEI, CovarianceStructure::EVI, CovarianceStructure::VVI,
  CovarianceStructure::EEE, CovarianceStructure::VEE, CovarianceStructure::EVE,
  CovarianceStructure::VVE, CovarianceStructure::EEV, CovarianceStructure::VEV,
  CovarianceStructure::EVV, CovarianceStructure::VVV,
};

inline std::string_view to_string(CovarianceStructure s) {
  switch (s) {
    case CovarianceStructure::EII: return "EII";
    case CovarianceStructure::VII: return "VII";
    case CovarianceStructure::EEI: return "EEI";
    case CovarianceStructure::VEI: return "VEI";
    case CovarianceStructure::EVI: return "EVI";
    case CovarianceStructure::VVI: return "VVI";
    case CovarianceStructure::EEE: return "EEE";
    case CovarianceStructure::VEE: return "VEE";
    case CovarianceStructure::EVE: return "EVE";
    case CovarianceStructure::VVE: return "VVE";
    case CovarianceStructure::EEV: return "EEV";
    case CovarianceStructure::VEV: return "VEV";
    case CovarianceStructure::EVV: return "EVV";
    case CovarianceStructure::VVV: return "VVV";
  }
  throw std::invalid_argument("unknown covariance structure");
}

inline std::optional<CovarianceStructure> parse_structure(std::string_view code) {
  for (auto s : all_structures)
    if (to_string(s) == code) return s;
  return std::nullopt;
}

inline CovarianceStructure structure_from_string(std::string_view code) {
  if (auto s = parse_structure(code)) return *s;
  throw std::invalid_argument("unknown covariance structure code: " + std::string(code));
}

/// Which family of mixing-weight model is fitted.
enum class Family { eFMR, eFMRC };

inline std::string_view to_string(Family f) {
  return f == Family::eFMR ? "eFMR" : "eFMRC";
}

inline Family family_from_string(std::string_view name) {
  if (name == "eFMR" || name == "efmr") return Family::eFMR;
  if (name == "eFMRC" || name == "efmrc") return Family::eFMRC;
  throw std::invalid_argument("unknown family: " + std::string(name));
}

/// Free parameters in the covariance part of the model.
inline int covariance_param_count(CovarianceStructure s, int d, int G) {
  const int h = d * (d + 1) / 2;
  switch (s) {
    case CovarianceStructure::EII: return 1;
    case CovarianceStructure::VII: return G;
    case CovarianceStructure::EEI: return d;
    case CovarianceStructure::VEI: return d + G - 1;
    case CovarianceStructure::EVI: return d * G - G + 1;
    case CovarianceStructure::VVI: return d * G;
    case CovarianceStructure::EEE: return h;
    case CovarianceStructure::VEE: return h + G - 1;
    case CovarianceStructure::EVE: return h + (G - 1) * (d - 1);
    case CovarianceStructure::VVE: return h + (G - 1) * d;
    case CovarianceStructure::EEV: return G * h - (G - 1) * d;
    case CovarianceStructure::VEV: return G * h - (G - 1) * (d - 1);
    case CovarianceStructure::EVV: return G * h - (G - 1);
    case CovarianceStructure::VVV: return G * h;
  }
  throw std::invalid_argument("unknown covariance structure");
}

/// Total free parameters of one fitted model: covariance part, G*d*(p+1)
/// regression coefficients, and G-1 mixing weights (eFMR) or (G-1)(q+1)
/// concomitant coefficients (eFMRC).
inline int n_free_params(Family family, CovarianceStructure s,
                         int G, int d, int p, int q = 0) {
  if (G < 1 || d < 1 || p < 0 || q < 0)
    throw std::invalid_argument("n_free_params: bad dimensions");
  const int mix = family == Family::eFMR ? G - 1 : (G - 1) * (q + 1);
  return covariance_param_count(s, d, G) + G * d * (p + 1) + mix;
}

/// BIC in the larger-is-better convention.
inline double bic(double loglik, int n_params, int n_obs) {
  if (n_obs < 1) throw std::invalid_argument("bic: N must be >= 1");
  return 2.0 * loglik - n_params * std::log(static_cast<double>(n_obs));
}

}  // namespace pfmr
