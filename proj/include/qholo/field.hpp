#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "qholo/error.hpp"
#include "qholo/fft.hpp"
#include "qholo/grid.hpp"

namespace qholo {

using cplx = std::complex<double>;

enum class Plane { near_field, far_field };

inline double nm_to_mm(double nm) { return nm * 1e-6; }

/// Sampled complex amplitude. In the near field the grid axes are positions
/// (mm); in the far field the same grid indexes spatial frequencies
/// nu = r_det / (lambda f) with pitch grid.dnu_x(). The constant factors
/// exp(-2ikf) and 1/(i lambda f) of the 2-f impulse response are not applied:
/// only squared moduli of correlations are ever reported.
struct ComplexField {
  Grid2D grid;
  double wavelength_mm;
  Plane plane = Plane::near_field;
  double focal_length_mm = 0.0;  // set by lens_fourier_2f
  std::vector<cplx> data;

  ComplexField(Grid2D g, double wavelength, Plane p = Plane::near_field)
      : grid(g), wavelength_mm(wavelength), plane(p), data(g.size()) {
    require(wavelength > 0.0, Errc::invalid_argument, "wavelength must be positive");
  }

  cplx& at(std::size_t ix, std::size_t iy) { return data[grid.index(ix, iy)]; }
  const cplx& at(std::size_t ix, std::size_t iy) const { return data[grid.index(ix, iy)]; }

  /// Sum of |a|^2 over samples (conserved by the unitary transforms).
  double power() const {
    double s = 0.0;
    for (const auto& v : data) s += std::norm(v);
    return s;
  }
  double energy() const { return power() * grid.dx() * grid.dy(); }

  /// Detector-plane coordinate of far-field column ix, mm (r = lambda f nu).
  double r_det_x(std::size_t ix) const { return wavelength_mm * focal_length_mm * grid.nu_x(ix); }
  double r_det_y(std::size_t iy) const { return wavelength_mm * focal_length_mm * grid.nu_y(iy); }
};

inline ComplexField fft2_centered(const ComplexField& field) {
  require(field.plane == Plane::near_field, Errc::plane_mismatch,
          "fft2_centered expects a near-field input");
  ComplexField out = field;
  out.plane = Plane::far_field;
  fft::centered(out.data, out.grid.nx(), out.grid.ny(), fft::Direction::forward);
  return out;
}

inline ComplexField ifft2_centered(const ComplexField& field) {
  require(field.plane == Plane::far_field, Errc::plane_mismatch,
          "ifft2_centered expects a far-field input");
  ComplexField out = field;
  out.plane = Plane::near_field;
  out.focal_length_mm = 0.0;
  fft::centered(out.data, out.grid.nx(), out.grid.ny(), fft::Direction::inverse);
  return out;
}

inline ComplexField lens_fourier_2f(const ComplexField& field, double focal_length_mm) {
  require(focal_length_mm > 0.0, Errc::invalid_argument, "focal length must be positive");
  ComplexField out = fft2_centered(field);
  out.focal_length_mm = focal_length_mm;
  return out;
}

namespace detail {

// exp(i 2 pi dz (sqrt(1/lambda^2 - nu^2) - 1/lambda)); the carrier term is a
// global phase and is removed. Written in the cancellation-free form.
inline cplx angular_spectrum_factor(double nu2, double wavelength_mm, double dz_mm) {
  const double inv_l = 1.0 / wavelength_mm;
  const double inv_l2 = inv_l * inv_l;
  if (nu2 <= inv_l2) {
    const double kz_minus_k = -nu2 / (std::sqrt(inv_l2 - nu2) + inv_l);
    return std::polar(1.0, 2.0 * std::numbers::pi * dz_mm * kz_minus_k);
  }
  const double decay = std::sqrt(nu2 - inv_l2);
  return cplx(std::exp(-2.0 * std::numbers::pi * std::abs(dz_mm) * decay), 0.0);
}

// In-place propagation of a spectrum laid out on the centered frequency grid.
inline void apply_angular_spectrum(std::vector<cplx>& spectrum, const Grid2D& grid,
                                   double wavelength_mm, double dz_mm) {
  for (std::size_t iy = 0; iy < grid.ny(); ++iy) {
    const double ny2 = grid.nu_y(iy) * grid.nu_y(iy);
    for (std::size_t ix = 0; ix < grid.nx(); ++ix) {
      const double nu2 = grid.nu_x(ix) * grid.nu_x(ix) + ny2;
      spectrum[grid.index(ix, iy)] *= angular_spectrum_factor(nu2, wavelength_mm, dz_mm);
    }
  }
}

}  // namespace detail

inline constexpr double kMaxPropagationMm = 100.0;

/// Free-space propagation by dz (mm) with the angular spectrum method.
inline ComplexField propagate_angular_spectrum(const ComplexField& field, double dz_mm) {
  require(field.plane == Plane::near_field, Errc::plane_mismatch,
          "propagation expects a near-field input");
  require(std::abs(dz_mm) <= kMaxPropagationMm, Errc::invalid_argument,
          "|dz| above 100 mm is outside the paraxial range of this model");
  if (dz_mm == 0.0) return field;
  ComplexField out = field;
  const auto nx = out.grid.nx();
  const auto ny = out.grid.ny();
  fft::centered(out.data, nx, ny, fft::Direction::forward);
  detail::apply_angular_spectrum(out.data, out.grid, out.wavelength_mm, dz_mm);
  fft::centered(out.data, nx, ny, fft::Direction::inverse);
  return out;
}

/// Gaussian beam whose intensity |a|^2 has standard deviation sigma_mm
/// (amplitude exp(-r^2 / (4 sigma^2))), unit peak at the grid center.
inline ComplexField gaussian_beam(const Grid2D& grid, double sigma_mm, double wavelength_mm) {
  require(sigma_mm > 0.0, Errc::invalid_argument, "beam sigma must be positive");
  require(sigma_mm >= 2.0 * std::max(grid.dx(), grid.dy()), Errc::invalid_argument,
          "beam sigma below two pixels is not resolved by the grid");
  ComplexField out(grid, wavelength_mm);
  const double inv = 1.0 / (4.0 * sigma_mm * sigma_mm);
  for (std::size_t iy = 0; iy < grid.ny(); ++iy) {
    const double y = grid.y_mm(iy);
    for (std::size_t ix = 0; ix < grid.nx(); ++ix) {
      const double x = grid.x_mm(ix);
      out.at(ix, iy) = std::exp(-(x * x + y * y) * inv);
    }
  }
  return out;
}

inline ComplexField uniform_beam(const Grid2D& grid, double wavelength_mm) {
  ComplexField out(grid, wavelength_mm);
  for (auto& v : out.data) v = 1.0;
  return out;
}

inline double fwhm_to_sigma(double fwhm) { return fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0))); }

}  // namespace qholo
