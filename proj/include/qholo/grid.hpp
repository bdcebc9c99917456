#pragma once

#include <bit>
#include <cstddef>
#include <string>

#include "qholo/error.hpp"

namespace qholo {

/// Square-pixel sampling grid in physical units (mm). The origin sits on
/// pixel n/2 along each axis; the same convention is used in the frequency
/// domain, where the pitch is 1/(n*d) mm^-1.
class Grid2D {
 public:
  Grid2D(std::size_t nx, std::size_t ny, double dx_mm, double dy_mm)
      : nx_(nx), ny_(ny), dx_(dx_mm), dy_(dy_mm) {
    require(nx >= 32 && ny >= 32 && std::has_single_bit(nx) && std::has_single_bit(ny),
            Errc::invalid_argument,
            "grid sizes must be powers of two >= 32 (got " + std::to_string(nx) + "x" +
                std::to_string(ny) + ")");
    require(dx_mm > 0.0 && dy_mm > 0.0, Errc::invalid_argument, "grid pitch must be positive");
  }

  static Grid2D square(std::size_t n, double pitch_mm) { return Grid2D(n, n, pitch_mm, pitch_mm); }

  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  double dx() const { return dx_; }
  double dy() const { return dy_; }
  std::size_t size() const { return nx_ * ny_; }
  std::size_t index(std::size_t ix, std::size_t iy) const { return iy * nx_ + ix; }

  std::ptrdiff_t cx() const { return static_cast<std::ptrdiff_t>(nx_ / 2); }
  std::ptrdiff_t cy() const { return static_cast<std::ptrdiff_t>(ny_ / 2); }

  double x_mm(std::size_t ix) const { return static_cast<double>(static_cast<std::ptrdiff_t>(ix) - cx()) * dx_; }
  double y_mm(std::size_t iy) const { return static_cast<double>(static_cast<std::ptrdiff_t>(iy) - cy()) * dy_; }

  double dnu_x() const { return 1.0 / (static_cast<double>(nx_) * dx_); }
  double dnu_y() const { return 1.0 / (static_cast<double>(ny_) * dy_); }
  double nu_x(std::size_t ix) const { return static_cast<double>(static_cast<std::ptrdiff_t>(ix) - cx()) * dnu_x(); }
  double nu_y(std::size_t iy) const { return static_cast<double>(static_cast<std::ptrdiff_t>(iy) - cy()) * dnu_y(); }

  /// Largest representable |nu| along each axis (Nyquist), mm^-1.
  double nu_max_x() const { return 0.5 / dx_; }
  double nu_max_y() const { return 0.5 / dy_; }

  friend bool operator==(const Grid2D&, const Grid2D&) = default;

 private:
  std::size_t nx_;
  std::size_t ny_;
  double dx_;
  double dy_;
};

}  // namespace qholo
