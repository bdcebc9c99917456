#pragma once

#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <numbers>

#include "qholo/error.hpp"
#include "qholo/field.hpp"

namespace qholo {

namespace bbo {

// Sellmeier fits for beta-barium borate, wavelength in micrometres.
inline double n_ordinary(double lambda_um) {
  const double l2 = lambda_um * lambda_um;
  return std::sqrt(2.7359 + 0.01878 / (l2 - 0.01822) - 0.01354 * l2);
}

inline double n_extraordinary(double lambda_um) {
  const double l2 = lambda_um * lambda_um;
  return std::sqrt(2.3753 + 0.01224 / (l2 - 0.01667) - 0.01516 * l2);
}

/// Extraordinary index for propagation at angle theta (rad) to the optic axis.
inline double n_extraordinary(double lambda_um, double theta) {
  const double no = n_ordinary(lambda_um);
  const double ne = n_extraordinary(lambda_um);
  const double c = std::cos(theta) / no;
  const double s = std::sin(theta) / ne;
  return 1.0 / std::sqrt(c * c + s * s);
}

/// Collinear type-II (e -> o + e) phase-matching angle for degenerate
/// down-conversion of a pump at lambda_p_um.
inline double type2_phase_matching_angle(double lambda_p_um) {
  const double ls = 2.0 * lambda_p_um;
  auto mismatch = [&](double theta) {
    return n_extraordinary(lambda_p_um, theta) -
           0.5 * (n_ordinary(ls) + n_extraordinary(ls, theta));
  };
  boost::math::tools::eps_tolerance<double> tol(50);
  auto [lo, hi] = boost::math::tools::bisect(mismatch, 0.1, 0.5 * std::numbers::pi, tol);
  return 0.5 * (lo + hi);
}

}  // namespace bbo

/// Nonlinear crystal and gain settings. Wavelengths are vacuum values in mm.
struct CrystalParams {
  double length_mm = 0.8;
  double n_signal = 1.6636;
  double n_idler = 1.5949;
  double pump_wavelength_mm = nm_to_mm(355.0);
  double signal_wavelength_mm = nm_to_mm(710.0);
  double sigma_phi_per_mm = 27.0;
  double g0 = 0.3;

  /// Reference geometry: 0.8 mm BBO pumped at 355 nm, degenerate type-II, with
  /// refractive indices evaluated from the Sellmeier fits at the collinear
  /// phase-matching angle (signal ordinary, idler extraordinary).
  static CrystalParams bbo_type2(double length_mm = 0.8, double g0 = 0.3) {
    CrystalParams c;
    c.length_mm = length_mm;
    c.g0 = g0;
    const double lp_um = 0.355;
    const double theta = bbo::type2_phase_matching_angle(lp_um);
    c.n_signal = bbo::n_ordinary(2.0 * lp_um);
    c.n_idler = bbo::n_extraordinary(2.0 * lp_um, theta);
    c.sigma_phi_per_mm = fwhm_to_sigma(64.0);
    return c;
  }

  void validate() const {
    require(length_mm > 0.0, Errc::invalid_argument, "crystal length must be positive");
    require(n_signal > 0.0 && n_idler > 0.0, Errc::invalid_argument,
            "refractive indices must be positive");
    require(std::abs(signal_wavelength_mm / (2.0 * pump_wavelength_mm) - 1.0) <= 1e-3,
            Errc::invalid_argument, "signal wavelength must be twice the pump wavelength");
    require(sigma_phi_per_mm > 0.0, Errc::invalid_argument, "sigma_phi must be positive");
    require(g0 >= 0.0 && g0 <= 0.5, Errc::invalid_argument,
            "parametric gain g0 must lie in [0, 0.5] (low-gain regime)");
  }
};

struct PumpParams {
  double sigma_mm = 0.68;  // intensity standard deviation

  void validate() const {
    require(sigma_mm > 0.0, Errc::invalid_argument, "pump sigma must be positive");
  }
};

}  // namespace qholo
