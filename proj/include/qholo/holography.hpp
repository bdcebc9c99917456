#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "qholo/error.hpp"
#include "qholo/field.hpp"
#include "qholo/rng.hpp"

namespace qholo {

/// Binary raster, row 0 first; nonzero means "on".
struct Bitmap {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> bits;

  Bitmap() = default;
  Bitmap(std::size_t w, std::size_t h) : width(w), height(h), bits(w * h, 0) {}
  std::uint8_t& at(std::size_t x, std::size_t y) { return bits[y * width + x]; }
  std::uint8_t at(std::size_t x, std::size_t y) const { return bits[y * width + x]; }
};

/// Procedural smiley: outline ring, two eyes, lower arc for the mouth.
inline Bitmap smiley_bitmap(std::size_t size = 64) {
  Bitmap bmp(size, size);
  const double h = 0.5 * static_cast<double>(size);
  for (std::size_t y = 0; y < size; ++y) {
    for (std::size_t x = 0; x < size; ++x) {
      const double u = (static_cast<double>(x) + 0.5 - h) / h;
      const double v = (static_cast<double>(y) + 0.5 - h) / h;
      const double r = std::hypot(u, v);
      const bool ring = r > 0.82 && r <= 1.0;
      const bool eye = std::hypot(std::abs(u) - 0.35, v + 0.3) < 0.14;
      const bool mouth = v > 0.15 && r > 0.42 && r < 0.58;
      bmp.at(x, y) = (ring || eye || mouth) ? 1 : 0;
    }
  }
  return bmp;
}

enum class TargetKind { dirac_array, speckle_image, custom };

/// Far-field amplitude to be reconstructed, sampled on the frequency grid of
/// `grid` (zero frequency at n/2). Energy sum |a|^2 is normalized to 1.
struct TargetPattern {
  Grid2D grid;
  TargetKind kind = TargetKind::custom;
  std::vector<cplx> amplitude;
  std::vector<std::string> warnings;

  explicit TargetPattern(Grid2D g, TargetKind k = TargetKind::custom)
      : grid(g), kind(k), amplitude(g.size()) {}

  double energy() const {
    double s = 0.0;
    for (const auto& a : amplitude) s += std::norm(a);
    return s;
  }

  /// Largest |nu_x| and |nu_y| (mm^-1) carrying nonzero amplitude.
  std::pair<double, double> support_extent() const {
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t iy = 0; iy < grid.ny(); ++iy)
      for (std::size_t ix = 0; ix < grid.nx(); ++ix)
        if (amplitude[grid.index(ix, iy)] != cplx{}) {
          mx = std::max(mx, std::abs(grid.nu_x(ix)));
          my = std::max(my, std::abs(grid.nu_y(iy)));
        }
    return {mx, my};
  }
};

namespace detail {

inline void normalize_energy(TargetPattern& t) {
  const double e = t.energy();
  require(e > 0.0, Errc::degenerate_input, "target pattern is identically zero");
  const double s = 1.0 / std::sqrt(e);
  for (auto& a : t.amplitude) a *= s;
}

inline void check_half_window(const TargetPattern& t) {
  auto [mx, my] = t.support_extent();
  const double tol = 1e-9;
  require(mx <= 0.5 * t.grid.nu_max_x() + tol && my <= 0.5 * t.grid.nu_max_y() + tol,
          Errc::invalid_argument,
          "target support must lie within half of the grid frequency window");
}

// Exact values on the axes so that e.g. a pi/2 step squares to exactly -1.
inline cplx unit_phasor(double phi) {
  const double quarter = phi / (0.5 * std::numbers::pi);
  const double k = std::round(quarter);
  if (std::abs(quarter - k) < 1e-12) {
    switch (((static_cast<long long>(k) % 4) + 4) % 4) {
      case 0: return {1.0, 0.0};
      case 1: return {0.0, 1.0};
      case 2: return {-1.0, 0.0};
      default: return {0.0, -1.0};
    }
  }
  return std::polar(1.0, phi);
}

}  // namespace detail

/// n x n lattice of unit delta peaks centred on the origin. Peaks that do
/// not fall on a frequency bin are snapped to the nearest one and a warning
/// is recorded on the returned pattern.
inline TargetPattern dirac_array_target(int n_per_side, double spacing_per_mm, const Grid2D& grid) {
  require(n_per_side >= 1, Errc::invalid_argument, "n_per_side must be >= 1");
  require(n_per_side == 1 || spacing_per_mm > 0.0, Errc::invalid_argument,
          "peak spacing must be positive");
  TargetPattern t(grid, TargetKind::dirac_array);
  const double half = 0.5 * (n_per_side - 1) * spacing_per_mm;
  require(half <= 0.5 * grid.nu_max_x() + 1e-9 && half <= 0.5 * grid.nu_max_y() + 1e-9,
          Errc::invalid_argument, "Dirac lattice exceeds half of the frequency window");
  bool snapped = false;
  for (int jy = 0; jy < n_per_side; ++jy) {
    for (int jx = 0; jx < n_per_side; ++jx) {
      const double bx = (jx * spacing_per_mm - half) / grid.dnu_x();
      const double by = (jy * spacing_per_mm - half) / grid.dnu_y();
      const double rx = std::round(bx);
      const double ry = std::round(by);
      snapped |= std::abs(bx - rx) > 1e-6 || std::abs(by - ry) > 1e-6;
      const auto ix = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(rx) + grid.cx());
      const auto iy = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(ry) + grid.cy());
      t.amplitude[grid.index(ix, iy)] = 1.0;
    }
  }
  if (snapped) t.warnings.emplace_back("Dirac peaks snapped to the nearest frequency bin");
  detail::normalize_energy(t);
  return t;
}

/// Bitmap scaled onto a disc/square of the given diameter (mm^-1) around the
/// origin and multiplied by a seeded speckle field of the given grain size.
/// grain_per_mm == 0 disables the speckle (plain bitmap amplitude).
inline TargetPattern speckle_image_target(const Bitmap& bitmap, double diameter_per_mm,
                                          double grain_per_mm, std::uint64_t seed,
                                          const Grid2D& grid) {
  require(bitmap.width > 0 && bitmap.height > 0, Errc::invalid_argument, "empty bitmap");
  for (auto b : bitmap.bits)
    require(b == 0 || b == 1, Errc::invalid_argument, "bitmap must be binary");
  require(diameter_per_mm > 0.0, Errc::invalid_argument, "diameter must be positive");
  require(0.5 * diameter_per_mm <= 0.5 * grid.nu_max_x() + 1e-9 &&
              0.5 * diameter_per_mm <= 0.5 * grid.nu_max_y() + 1e-9,
          Errc::invalid_argument, "target diameter exceeds half of the frequency window");
  require(grain_per_mm == 0.0 || grain_per_mm >= std::max(grid.dnu_x(), grid.dnu_y()),
          Errc::invalid_argument, "speckle grain below one frequency bin");

  std::vector<cplx> speckle(grid.size(), cplx(1.0, 0.0));
  if (grain_per_mm > 0.0) {
    // Random-phase pupil of diameter 1/grain: its transform has speckle of
    // that grain size in the frequency plane.
    ComplexField pupil(grid, 1.0);
    KeyedStream rng(seed, 0, Arm::signal, Purpose::speckle);
    const double radius = 0.5 / grain_per_mm;
    double count = 0.0;
    for (std::size_t iy = 0; iy < grid.ny(); ++iy)
      for (std::size_t ix = 0; ix < grid.nx(); ++ix) {
        const double phase = 2.0 * std::numbers::pi * rng.uniform();
        if (std::hypot(grid.x_mm(ix), grid.y_mm(iy)) <= radius) {
          pupil.at(ix, iy) = std::polar(1.0, phase);
          count += 1.0;
        }
      }
    auto far = fft2_centered(pupil);
    const double rms = std::sqrt(count / static_cast<double>(grid.size()));
    for (std::size_t i = 0; i < grid.size(); ++i) speckle[i] = far.data[i] / rms;
  }

  TargetPattern t(grid, TargetKind::speckle_image);
  const double half = 0.5 * diameter_per_mm;
  for (std::size_t iy = 0; iy < grid.ny(); ++iy) {
    const double ny = grid.nu_y(iy);
    if (ny < -half || ny >= half) continue;
    const auto by = static_cast<std::size_t>((ny + half) / diameter_per_mm *
                                             static_cast<double>(bitmap.height));
    for (std::size_t ix = 0; ix < grid.nx(); ++ix) {
      const double nx = grid.nu_x(ix);
      if (nx < -half || nx >= half) continue;
      const auto bx = static_cast<std::size_t>((nx + half) / diameter_per_mm *
                                               static_cast<double>(bitmap.width));
      if (bitmap.at(std::min(bx, bitmap.width - 1), std::min(by, bitmap.height - 1)))
        t.amplitude[grid.index(ix, iy)] = speckle[grid.index(ix, iy)];
    }
  }
  detail::normalize_energy(t);
  return t;
}

/// Two-level phase mask. Level 1 pixels carry phase
/// phase_step * (1 + depth_error); level 0 pixels carry none.
struct PhaseHologram {
  Grid2D grid;
  std::vector<std::uint8_t> levels;
  double phase_step_rad = 0.5 * std::numbers::pi;
  double depth_error = 0.0;
  double carrier_x_per_mm = 0.0;
  double carrier_y_per_mm = 0.0;
  double wavelength_mm = nm_to_mm(710.0);

  explicit PhaseHologram(Grid2D g) : grid(g), levels(g.size(), 0) {}

  double level_phase() const { return phase_step_rad * (1.0 + depth_error); }
  double fill_factor() const {
    double on = 0.0;
    for (auto b : levels) on += b;
    return on / static_cast<double>(levels.size());
  }
};

/// Single-pass interference binarization: back-propagate the target,
/// interfere with the tilted carrier, keep the sign.
inline PhaseHologram design_offaxis_binary(const TargetPattern& target, double carrier_x_per_mm,
                                           double carrier_y_per_mm, double phase_step_rad,
                                           double wavelength_mm = nm_to_mm(710.0)) {
  require(target.energy() > 0.0, Errc::degenerate_input, "target pattern is identically zero");
  const Grid2D& grid = target.grid;
  auto [sx, sy] = target.support_extent();
  require(std::abs(carrier_x_per_mm) + sx <= grid.nu_max_x() + 1e-9 &&
              std::abs(carrier_y_per_mm) + sy <= grid.nu_max_y() + 1e-9,
          Errc::invalid_argument, "carrier plus target support leaves the frequency window");

  ComplexField spectrum(grid, wavelength_mm, Plane::far_field);
  spectrum.data = target.amplitude;
  const ComplexField u = ifft2_centered(spectrum);

  PhaseHologram holo(grid);
  holo.phase_step_rad = phase_step_rad;
  holo.carrier_x_per_mm = carrier_x_per_mm;
  holo.carrier_y_per_mm = carrier_y_per_mm;
  holo.wavelength_mm = wavelength_mm;
  for (std::size_t iy = 0; iy < grid.ny(); ++iy) {
    for (std::size_t ix = 0; ix < grid.nx(); ++ix) {
      const double phase = 2.0 * std::numbers::pi *
                           (carrier_x_per_mm * grid.x_mm(ix) + carrier_y_per_mm * grid.y_mm(iy));
      const double s = std::real(u.at(ix, iy) * std::polar(1.0, phase));
      holo.levels[grid.index(ix, iy)] = s > 0.0 ? 1 : 0;
    }
  }
  return holo;
}

/// Near-field transmission exp(i phi) or, for the biphoton readout, its
/// square exp(2 i phi).
inline ComplexField transmission(const PhaseHologram& holo, bool squared) {
  ComplexField t(holo.grid, holo.wavelength_mm);
  const double phi = holo.level_phase() * (squared ? 2.0 : 1.0);
  const cplx on = detail::unit_phasor(phi);
  for (std::size_t i = 0; i < t.data.size(); ++i) t.data[i] = holo.levels[i] ? on : cplx(1.0, 0.0);
  return t;
}

/// Hologram with every pixel at level 0 (a transparent plate).
inline PhaseHologram uniform_hologram(const Grid2D& grid, double wavelength_mm = nm_to_mm(710.0)) {
  PhaseHologram h(grid);
  h.wavelength_mm = wavelength_mm;
  return h;
}

}  // namespace qholo
