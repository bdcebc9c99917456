#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "qholo/error.hpp"

namespace qholo {

/// Real map over a centred spatial-frequency grid (mm^-1). The zero
/// frequency is pixel (width/2, height/2).
struct FrequencyImage {
  std::size_t width = 0;
  std::size_t height = 0;
  double dnu_x = 1.0;
  double dnu_y = 1.0;
  std::vector<double> values;

  FrequencyImage() = default;
  FrequencyImage(std::size_t w, std::size_t h, double px, double py)
      : width(w), height(h), dnu_x(px), dnu_y(py), values(w * h, 0.0) {}

  std::size_t size() const { return values.size(); }
  std::size_t index(std::size_t ix, std::size_t iy) const { return iy * width + ix; }
  double& at(std::size_t ix, std::size_t iy) { return values[index(ix, iy)]; }
  double at(std::size_t ix, std::size_t iy) const { return values[index(ix, iy)]; }

  std::ptrdiff_t cx() const { return static_cast<std::ptrdiff_t>(width / 2); }
  std::ptrdiff_t cy() const { return static_cast<std::ptrdiff_t>(height / 2); }
  double nu_x(std::size_t ix) const { return static_cast<double>(static_cast<std::ptrdiff_t>(ix) - cx()) * dnu_x; }
  double nu_y(std::size_t iy) const { return static_cast<double>(static_cast<std::ptrdiff_t>(iy) - cy()) * dnu_y; }

  /// Nearest pixel to a frequency; false when it falls off the map.
  bool pixel_of(double nx, double ny, std::size_t& ix, std::size_t& iy) const {
    const auto px = static_cast<std::ptrdiff_t>(std::lround(nx / dnu_x)) + cx();
    const auto py = static_cast<std::ptrdiff_t>(std::lround(ny / dnu_y)) + cy();
    if (px < 0 || py < 0 || px >= static_cast<std::ptrdiff_t>(width) ||
        py >= static_cast<std::ptrdiff_t>(height))
      return false;
    ix = static_cast<std::size_t>(px);
    iy = static_cast<std::size_t>(py);
    return true;
  }

  bool same_grid(const FrequencyImage& o) const {
    return width == o.width && height == o.height &&
           std::abs(dnu_x - o.dnu_x) <= 1e-9 * dnu_x && std::abs(dnu_y - o.dnu_y) <= 1e-9 * dnu_y;
  }

  double sum() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
};

/// Axis-aligned region in frequency units (inclusive bounds).
struct Window {
  double x_min = -std::numeric_limits<double>::infinity();
  double x_max = std::numeric_limits<double>::infinity();
  double y_min = -std::numeric_limits<double>::infinity();
  double y_max = std::numeric_limits<double>::infinity();

  static Window all() { return {}; }
  static Window box(double cx, double cy, double half_x, double half_y) {
    return {cx - half_x, cx + half_x, cy - half_y, cy + half_y};
  }
  static Window box(double cx, double cy, double half) { return box(cx, cy, half, half); }

  bool contains(double nx, double ny) const {
    const double eps = 1e-9;
    return nx >= x_min - eps && nx <= x_max + eps && ny >= y_min - eps && ny <= y_max + eps;
  }
};

inline std::vector<std::size_t> window_indices(const FrequencyImage& img, const Window& w) {
  std::vector<std::size_t> out;
  for (std::size_t iy = 0; iy < img.height; ++iy) {
    const double ny = img.nu_y(iy);
    if (ny < w.y_min - 1e-9 || ny > w.y_max + 1e-9) continue;
    for (std::size_t ix = 0; ix < img.width; ++ix)
      if (w.contains(img.nu_x(ix), ny)) out.push_back(img.index(ix, iy));
  }
  return out;
}

inline double window_sum(const FrequencyImage& img, const Window& w) {
  double s = 0.0;
  for (auto i : window_indices(img, w)) s += img.values[i];
  return s;
}

/// Central w x h crop; keeps the zero frequency at the new centre.
inline FrequencyImage crop_center(const FrequencyImage& img, std::size_t w, std::size_t h) {
  require(w <= img.width && h <= img.height, Errc::invalid_argument, "crop larger than image");
  FrequencyImage out(w, h, img.dnu_x, img.dnu_y);
  const auto ox = img.cx() - static_cast<std::ptrdiff_t>(w / 2);
  const auto oy = img.cy() - static_cast<std::ptrdiff_t>(h / 2);
  for (std::size_t iy = 0; iy < h; ++iy)
    for (std::size_t ix = 0; ix < w; ++ix)
      out.at(ix, iy) = img.at(static_cast<std::size_t>(ox + static_cast<std::ptrdiff_t>(ix)),
                              static_cast<std::size_t>(oy + static_cast<std::ptrdiff_t>(iy)));
  return out;
}

}  // namespace qholo
