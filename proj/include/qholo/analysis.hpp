#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <span>
#include <vector>

#include "qholo/crystal.hpp"
#include "qholo/detection.hpp"
#include "qholo/error.hpp"
#include "qholo/fft.hpp"
#include "qholo/image.hpp"

namespace qholo {

/// Normalized coincidence correlation over the sum coordinate s = r1 + r2,
/// stored on a (2 nx) x (2 ny) grid whose centre pixel is s = 0. Values are
///   C(s) / sqrt(<N_s> <N_i>),
///   C(s) = (1/K) sum_k sum_r [S_k(r) - S(r)] [I_k(s - r) - I(s - r)],
/// so their sum over a window is the degree of correlation of that window.
struct CorrelationMap {
  FrequencyImage map;
  /// Expected standard deviation of `map` for independent frames with the
  /// same mean images. Empty for maps that did not come from frames.
  FrequencyImage noise;
  std::uint64_t frames = 0;
  double mean_signal = 0.0;  // photons (or intensity) per frame, signal arm
  double mean_idler = 0.0;
  /// Region where sums are well sampled (the detector-sized central window).
  Window domain = Window::all();

  double normalization() const { return std::sqrt(mean_signal * mean_idler); }
  bool has_noise() const { return !noise.values.empty(); }

  /// Map divided by its independent-frame noise (zero where undefined).
  FrequencyImage significance() const {
    require(has_noise(), Errc::invalid_argument, "map carries no noise model");
    FrequencyImage z(map.width, map.height, map.dnu_x, map.dnu_y);
    for (std::size_t i = 0; i < map.size(); ++i)
      z.values[i] = noise.values[i] > 0.0 ? map.values[i] / noise.values[i] : 0.0;
    return z;
  }

  /// Detector-sized central crop (the sum frequencies inside +-nu_max).
  FrequencyImage coincidence_window() const { return crop_center(map, map.width / 2, map.height / 2); }
};

namespace detail {

inline std::size_t padded_index(std::size_t x, std::size_t y, std::size_t nx) { return y * 2 * nx + x; }

/// Forward transform of two real n x n images zero-padded to 2n x 2n,
/// packed as a + i b; returns the spectrum of the linear convolution a * b.
inline std::vector<cplx> convolution_spectrum(std::span<const double> a, std::span<const double> b,
                                              std::size_t nx, std::size_t ny) {
  const std::size_t px = 2 * nx;
  const std::size_t py = 2 * ny;
  std::vector<cplx> z(px * py);
  for (std::size_t y = 0; y < ny; ++y)
    for (std::size_t x = 0; x < nx; ++x) z[padded_index(x, y, nx)] = cplx(a[y * nx + x], b[y * nx + x]);
  fft::transform(z, px, py, fft::Direction::forward);
  std::vector<cplx> prod(px * py);
  for (std::size_t ky = 0; ky < py; ++ky) {
    const std::size_t my = (py - ky) % py;
    for (std::size_t kx = 0; kx < px; ++kx) {
      const std::size_t mx = (px - kx) % px;
      const cplx zk = z[ky * px + kx];
      const cplx zm = std::conj(z[my * px + mx]);
      // A = (zk + zm) / 2, B = (zk - zm) / (2i)  ->  A B = (zk^2 - zm^2) / (4i)
      prod[ky * px + kx] = (zk * zk - zm * zm) / cplx(0.0, 4.0);
    }
  }
  return prod;
}

inline std::vector<double> inverse_real(std::vector<cplx> spectrum, std::size_t px, std::size_t py) {
  fft::transform(spectrum, px, py, fft::Direction::inverse);
  std::vector<double> out(px * py);
  const double scale = 1.0 / static_cast<double>(px * py);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = spectrum[i].real() * scale;
  return out;
}

/// Linear convolution of two n x n images on the 2n x 2n grid: out[p1 + p2].
inline std::vector<double> linear_convolution(std::span<const double> a, std::span<const double> b,
                                              std::size_t nx, std::size_t ny) {
  return inverse_real(convolution_spectrum(a, b, nx, ny), 2 * nx, 2 * ny);
}

inline CorrelationMap finalize_correlation(std::uint64_t frames, const std::vector<double>& product_sum,
                                           const std::vector<double>& sum_s,
                                           const std::vector<double>& sum_s2,
                                           const std::vector<double>& sum_i,
                                           const std::vector<double>& sum_i2, std::size_t nx,
                                           std::size_t ny, double dnu_x, double dnu_y) {
  require(frames >= 2, Errc::invalid_argument, "correlation needs at least two frames");
  const double k = static_cast<double>(frames);
  std::vector<double> mean_s(nx * ny), mean_i(nx * ny), var_s(nx * ny), var_i(nx * ny);
  double tot_s = 0.0, tot_i = 0.0;
  for (std::size_t p = 0; p < nx * ny; ++p) {
    mean_s[p] = sum_s[p] / k;
    mean_i[p] = sum_i[p] / k;
    var_s[p] = std::max(sum_s2[p] / k - mean_s[p] * mean_s[p], 0.0);
    var_i[p] = std::max(sum_i2[p] / k - mean_i[p] * mean_i[p], 0.0);
    tot_s += mean_s[p];
    tot_i += mean_i[p];
  }
  require(tot_s > 0.0 && tot_i > 0.0, Errc::degenerate_input,
          "no detections in one of the arms");
  const auto mean_conv = linear_convolution(mean_s, mean_i, nx, ny);
  const auto var_conv = linear_convolution(var_s, var_i, nx, ny);

  CorrelationMap out;
  out.frames = frames;
  out.mean_signal = tot_s;
  out.mean_idler = tot_i;
  const double g = out.normalization();
  out.map = FrequencyImage(2 * nx, 2 * ny, dnu_x, dnu_y);
  out.noise = FrequencyImage(2 * nx, 2 * ny, dnu_x, dnu_y);
  for (std::size_t q = 0; q < product_sum.size(); ++q) {
    out.map.values[q] = (product_sum[q] / k - mean_conv[q]) / g;
    out.noise.values[q] = std::sqrt(std::max(var_conv[q], 0.0) / k) / g;
  }
  out.domain = Window::box(0.0, 0.0, (static_cast<double>(nx) / 2.0 - 1.0) * dnu_x,
                           (static_cast<double>(ny) / 2.0 - 1.0) * dnu_y);
  return out;
}

}  // namespace detail

/// Streaming accumulator for binary photon frames. All running sums are
/// integers, so the result is bit-exact whatever the frame order or the way
/// frames are split across accumulators before merging.
class PhotonCorrelationAccumulator {
 public:
  PhotonCorrelationAccumulator(std::size_t nx, std::size_t ny, double dnu_x, double dnu_y)
      : nx_(nx), ny_(ny), dnu_x_(dnu_x), dnu_y_(dnu_y),
        sum_s_(nx * ny, 0), sum_i_(nx * ny, 0), pairs_(4 * nx * ny, 0) {}

  void add(const PhotonFrame& s, const PhotonFrame& i) {
    require(s.width == nx_ && s.height == ny_ && i.width == nx_ && i.height == ny_,
            Errc::grid_mismatch, "frame size differs from the accumulator grid");
    std::vector<std::uint32_t> on_s, on_i;
    for (std::size_t p = 0; p < s.bits.size(); ++p)
      if (s.bits[p]) {
        on_s.push_back(static_cast<std::uint32_t>(p));
        ++sum_s_[p];
      }
    for (std::size_t p = 0; p < i.bits.size(); ++p)
      if (i.bits[p]) {
        on_i.push_back(static_cast<std::uint32_t>(p));
        ++sum_i_[p];
      }
    ++frames_;
    const double direct_cost = static_cast<double>(on_s.size()) * static_cast<double>(on_i.size());
    const double fft_cost = 8.0 * static_cast<double>(pairs_.size()) * std::log2(static_cast<double>(pairs_.size()));
    if (direct_cost <= fft_cost) {
      for (auto ps : on_s) {
        const std::size_t xs = ps % nx_, ys = ps / nx_;
        for (auto pi : on_i) {
          const std::size_t xi = pi % nx_, yi = pi / nx_;
          ++pairs_[detail::padded_index(xs + xi, ys + yi, nx_)];
        }
      }
      return;
    }
    std::vector<double> a(s.bits.begin(), s.bits.end()), b(i.bits.begin(), i.bits.end());
    const auto conv = detail::linear_convolution(a, b, nx_, ny_);
    for (std::size_t q = 0; q < conv.size(); ++q) pairs_[q] += std::llround(conv[q]);
  }

  void merge(const PhotonCorrelationAccumulator& o) {
    require(o.nx_ == nx_ && o.ny_ == ny_, Errc::grid_mismatch, "accumulator grids differ");
    frames_ += o.frames_;
    for (std::size_t p = 0; p < sum_s_.size(); ++p) {
      sum_s_[p] += o.sum_s_[p];
      sum_i_[p] += o.sum_i_[p];
    }
    for (std::size_t q = 0; q < pairs_.size(); ++q) pairs_[q] += o.pairs_[q];
  }

  std::uint64_t frames() const { return frames_; }
  const std::vector<std::int64_t>& pair_counts() const { return pairs_; }

  CorrelationMap finish() const {
    std::vector<double> s(sum_s_.begin(), sum_s_.end()), i(sum_i_.begin(), sum_i_.end());
    std::vector<double> p(pairs_.begin(), pairs_.end());
    // Binary pixels: sum of squares equals the sum.
    return detail::finalize_correlation(frames_, p, s, s, i, i, nx_, ny_, dnu_x_, dnu_y_);
  }

 private:
  std::size_t nx_, ny_;
  double dnu_x_, dnu_y_;
  std::uint64_t frames_ = 0;
  std::vector<std::int64_t> sum_s_, sum_i_;
  std::vector<std::int64_t> pairs_;
};

/// Accumulator for real-valued images (e.g. Wigner intensities |a|^2). The
/// frame products are summed in the Fourier domain; results are
/// deterministic for a fixed merge tree (see block_reduce).
class IntensityCorrelationAccumulator {
 public:
  IntensityCorrelationAccumulator(std::size_t nx, std::size_t ny, double dnu_x, double dnu_y)
      : nx_(nx), ny_(ny), dnu_x_(dnu_x), dnu_y_(dnu_y),
        sum_s_(nx * ny, 0.0), sum_s2_(nx * ny, 0.0), sum_i_(nx * ny, 0.0), sum_i2_(nx * ny, 0.0),
        spectrum_(4 * nx * ny, cplx{}) {}

  void add(std::span<const double> s, std::span<const double> i) {
    require(s.size() == nx_ * ny_ && i.size() == nx_ * ny_, Errc::grid_mismatch,
            "image size differs from the accumulator grid");
    for (std::size_t p = 0; p < s.size(); ++p) {
      sum_s_[p] += s[p];
      sum_s2_[p] += s[p] * s[p];
      sum_i_[p] += i[p];
      sum_i2_[p] += i[p] * i[p];
    }
    const auto prod = detail::convolution_spectrum(s, i, nx_, ny_);
    for (std::size_t q = 0; q < prod.size(); ++q) spectrum_[q] += prod[q];
    ++frames_;
  }

  void merge(const IntensityCorrelationAccumulator& o) {
    require(o.nx_ == nx_ && o.ny_ == ny_, Errc::grid_mismatch, "accumulator grids differ");
    frames_ += o.frames_;
    for (std::size_t p = 0; p < sum_s_.size(); ++p) {
      sum_s_[p] += o.sum_s_[p];
      sum_s2_[p] += o.sum_s2_[p];
      sum_i_[p] += o.sum_i_[p];
      sum_i2_[p] += o.sum_i2_[p];
    }
    for (std::size_t q = 0; q < spectrum_.size(); ++q) spectrum_[q] += o.spectrum_[q];
  }

  std::uint64_t frames() const { return frames_; }

  CorrelationMap finish() const {
    const auto p = detail::inverse_real(spectrum_, 2 * nx_, 2 * ny_);
    return detail::finalize_correlation(frames_, p, sum_s_, sum_s2_, sum_i_, sum_i2_, nx_, ny_,
                                        dnu_x_, dnu_y_);
  }

 private:
  std::size_t nx_, ny_;
  double dnu_x_, dnu_y_;
  std::uint64_t frames_ = 0;
  std::vector<double> sum_s_, sum_s2_, sum_i_, sum_i2_;
  std::vector<cplx> spectrum_;
};

namespace detail {

inline void check_streams(std::span<const PhotonFrame> s, std::span<const PhotonFrame> i,
                          std::size_t min_frames) {
  require(s.size() == i.size(), Errc::invalid_argument, "signal and idler streams differ in length");
  require(s.size() >= min_frames, Errc::invalid_argument,
          "not enough frames (need " + std::to_string(min_frames) + ")");
  for (std::size_t k = 0; k < s.size(); ++k)
    require(s[k].width == s[0].width && s[k].height == s[0].height && i[k].width == s[0].width &&
                i[k].height == s[0].height,
            Errc::grid_mismatch, "frames have inconsistent sizes");
}

}  // namespace detail

inline CorrelationMap sum_coordinate_correlation(std::span<const PhotonFrame> signal,
                                                 std::span<const PhotonFrame> idler, double dnu_x,
                                                 double dnu_y) {
  detail::check_streams(signal, idler, 2);
  PhotonCorrelationAccumulator acc(signal[0].width, signal[0].height, dnu_x, dnu_y);
  for (std::size_t k = 0; k < signal.size(); ++k) acc.add(signal[k], idler[k]);
  return acc.finish();
}

/// Same statistic with the idler stream cyclically delayed by `shift`
/// frames, so no pair shares a pump pulse.
inline CorrelationMap shuffled_control(std::span<const PhotonFrame> signal,
                                       std::span<const PhotonFrame> idler, double dnu_x,
                                       double dnu_y, std::size_t shift = 1) {
  detail::check_streams(signal, idler, 3);
  require(shift % signal.size() != 0, Errc::invalid_argument,
          "a zero frame shift would reproduce the true correlation");
  PhotonCorrelationAccumulator acc(signal[0].width, signal[0].height, dnu_x, dnu_y);
  for (std::size_t k = 0; k < signal.size(); ++k)
    acc.add(signal[k], idler[(k + shift) % signal.size()]);
  return acc.finish();
}

/// Streaming form of shuffled_control with shift 1: keeps the first idler
/// frame and the previous signal frame only.
class ShuffledStream {
 public:
  ShuffledStream(std::size_t nx, std::size_t ny, double dnu_x, double dnu_y)
      : acc_(nx, ny, dnu_x, dnu_y) {}

  void add(const PhotonFrame& s, const PhotonFrame& i) {
    if (!first_idler_) {
      first_idler_ = i;
    } else {
      acc_.add(*previous_signal_, i);
    }
    previous_signal_ = s;
  }

  CorrelationMap finish() {
    require(acc_.frames() + 1 >= 3, Errc::invalid_argument, "not enough frames (need 3)");
    PhotonCorrelationAccumulator acc = acc_;
    acc.add(*previous_signal_, *first_idler_);
    return acc.finish();
  }

 private:
  PhotonCorrelationAccumulator acc_;
  std::optional<PhotonFrame> first_idler_;
  std::optional<PhotonFrame> previous_signal_;
};

inline double degree_of_correlation(const CorrelationMap& map, const Window& window = Window::all()) {
  const auto idx = window_indices(map.map, window);
  require(!idx.empty(), Errc::invalid_argument, "degree window is empty");
  double s = 0.0;
  for (auto i : idx) s += map.map.values[i];
  return s;
}

inline double median(std::vector<double> v) {
  require(!v.empty(), Errc::invalid_argument, "median of an empty set");
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(v.begin(), mid);
  return 0.5 * (lo + hi);
}

/// Robust background level and standard deviation (median, 1.4826 MAD).
struct Background {
  double level = 0.0;
  double sigma = 0.0;
};

inline Background robust_background(const std::vector<double>& samples) {
  require(samples.size() >= 8, Errc::invalid_argument, "background region too small");
  Background b;
  b.level = median(samples);
  std::vector<double> dev(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) dev[i] = std::abs(samples[i] - b.level);
  b.sigma = 1.4826 * median(std::move(dev));
  return b;
}

/// Pixels inside `domain` but outside every exclusion window.
inline std::vector<double> background_samples(const FrequencyImage& img, const Window& domain,
                                              std::span<const Window> exclusions) {
  std::vector<double> out;
  for (auto i : window_indices(img, domain)) {
    const double nx = img.nu_x(i % img.width);
    const double ny = img.nu_y(i / img.width);
    bool excluded = false;
    for (const auto& w : exclusions) excluded |= w.contains(nx, ny);
    if (!excluded) out.push_back(img.values[i]);
  }
  return out;
}

/// Background of the significance map (or of the raw map when no noise
/// model is attached) over the map domain minus the exclusion windows.
inline Background map_background(const CorrelationMap& map, std::span<const Window> exclusions) {
  const FrequencyImage& img = map.has_noise() ? map.significance() : map.map;
  return robust_background(background_samples(img, map.domain, exclusions));
}

struct PeakWidths {
  double sigma_nu_x = 0.0;
  double sigma_nu_y = 0.0;
  double snr = 0.0;
};

/// Background-subtracted second moments of the single peak in `window`.
inline PeakWidths peak_widths(const CorrelationMap& map, const Window& window, double min_snr = 5.0) {
  const auto idx = window_indices(map.map, window);
  require(!idx.empty(), Errc::invalid_argument, "peak window is empty");
  const std::array<Window, 1> excl{window};
  const auto raw_bg = robust_background(background_samples(map.map, map.domain, excl));

  PeakWidths out;
  if (map.has_noise()) {
    const auto z = map.significance();
    const auto zbg = robust_background(background_samples(z, map.domain, excl));
    double zmax = -std::numeric_limits<double>::infinity();
    for (auto i : idx) zmax = std::max(zmax, z.values[i]);
    out.snr = zbg.sigma > 0.0 ? (zmax - zbg.level) / zbg.sigma : 0.0;
  } else {
    double vmax = -std::numeric_limits<double>::infinity();
    for (auto i : idx) vmax = std::max(vmax, map.map.values[i]);
    out.snr = raw_bg.sigma > 0.0 ? (vmax - raw_bg.level) / raw_bg.sigma
                                 : std::numeric_limits<double>::infinity();
  }
  require(out.snr >= min_snr, Errc::low_snr, "correlation peak SNR below threshold");

  double w = 0.0, mx = 0.0, my = 0.0;
  for (auto i : idx) {
    const double v = map.map.values[i] - raw_bg.level;
    w += v;
    mx += v * map.map.nu_x(i % map.map.width);
    my += v * map.map.nu_y(i / map.map.width);
  }
  require(w > 0.0, Errc::degenerate_input, "peak has no positive mass above background");
  mx /= w;
  my /= w;
  double vx = 0.0, vy = 0.0;
  for (auto i : idx) {
    const double v = map.map.values[i] - raw_bg.level;
    const double dx = map.map.nu_x(i % map.map.width) - mx;
    const double dy = map.map.nu_y(i / map.map.width) - my;
    vx += v * dx * dx;
    vy += v * dy * dy;
  }
  require(vx > 0.0 && vy > 0.0, Errc::degenerate_input, "peak second moments are not positive");
  out.sigma_nu_x = std::sqrt(vx / w);
  out.sigma_nu_y = std::sqrt(vy / w);
  return out;
}

/// Empirical Schmidt number sigma_phi^2 / (sigma_x sigma_y).
inline double schmidt_empirical(double sigma_phi, double sigma_nu_x, double sigma_nu_y) {
  require(sigma_phi > 0.0 && sigma_nu_x > 0.0 && sigma_nu_y > 0.0, Errc::invalid_argument,
          "Schmidt widths must be positive");
  return sigma_phi * sigma_phi / (sigma_nu_x * sigma_nu_y);
}

/// Theoretical Schmidt number of a thin crystal pumped by a Gaussian beam,
/// (2 pi 0.69 / 1.89)^2 sigma_pump^2 / (lambda_s L (1/n_s + 1/n_i)).
inline double schmidt_theoretical(const CrystalParams& crystal, const PumpParams& pump) {
  require(crystal.length_mm > 0.0 && crystal.n_signal > 0.0 && crystal.n_idler > 0.0 &&
              crystal.signal_wavelength_mm > 0.0,
          Errc::invalid_argument, "crystal parameters must be positive");
  pump.validate();
  const double pre = 2.0 * std::numbers::pi * 0.69 / 1.89;
  return pre * pre * pump.sigma_mm * pump.sigma_mm /
         (crystal.signal_wavelength_mm * crystal.length_mm *
          (1.0 / crystal.n_signal + 1.0 / crystal.n_idler));
}

/// 10 log10(v / max), clipped at floor_db; non-positive values map to the floor.
inline FrequencyImage to_decibels(const FrequencyImage& img, double floor_db = -30.0) {
  double vmax = 0.0;
  for (double v : img.values) vmax = std::max(vmax, v);
  require(vmax > 0.0, Errc::degenerate_input, "map has no positive peak");
  FrequencyImage out(img.width, img.height, img.dnu_x, img.dnu_y);
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double v = img.values[i];
    out.values[i] = v > 0.0 ? std::max(floor_db, 10.0 * std::log10(v / vmax)) : floor_db;
  }
  return out;
}

/// Masses of the 0-order and +-1-order windows of a sum-coordinate map.
struct OrderMasses {
  double zero = 0.0;
  double plus = 0.0;
  double minus = 0.0;

  double first_orders() const { return plus + minus; }
  double zero_to_first() const { return zero / first_orders(); }
};

inline OrderMasses order_masses(const FrequencyImage& img, double carrier_x, double carrier_y,
                                double half_width) {
  return {window_sum(img, Window::box(0.0, 0.0, half_width)),
          window_sum(img, Window::box(carrier_x, carrier_y, half_width)),
          window_sum(img, Window::box(-carrier_x, -carrier_y, half_width))};
}

/// A peak is "located" at a design position when the largest value within
/// +-tolerance bins is also the largest within +-isolation bins.
struct PeakCheck {
  double nu_x = 0.0;
  double nu_y = 0.0;
  double value = 0.0;
  bool located = false;
};

inline PeakCheck check_peak(const FrequencyImage& img, double nu_x, double nu_y, int tolerance_bins,
                            int isolation_bins) {
  PeakCheck out{nu_x, nu_y, -std::numeric_limits<double>::infinity(), false};
  std::size_t cx = 0, cy = 0;
  if (!img.pixel_of(nu_x, nu_y, cx, cy)) return out;
  double near = -std::numeric_limits<double>::infinity();
  double wide = near;
  for (int dy = -isolation_bins; dy <= isolation_bins; ++dy)
    for (int dx = -isolation_bins; dx <= isolation_bins; ++dx) {
      const auto x = static_cast<std::ptrdiff_t>(cx) + dx;
      const auto y = static_cast<std::ptrdiff_t>(cy) + dy;
      if (x < 0 || y < 0 || x >= static_cast<std::ptrdiff_t>(img.width) ||
          y >= static_cast<std::ptrdiff_t>(img.height))
        continue;
      const double v = img.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y));
      wide = std::max(wide, v);
      if (std::abs(dx) <= tolerance_bins && std::abs(dy) <= tolerance_bins) near = std::max(near, v);
    }
  out.value = near;
  out.located = near >= wide;
  return out;
}

/// Running mean of real images (e.g. single-arm far-field intensities).
class MeanImage {
 public:
  MeanImage(std::size_t nx, std::size_t ny) : nx_(nx), ny_(ny), sum_(nx * ny, 0.0) {}

  void add(std::span<const double> img) {
    require(img.size() == sum_.size(), Errc::grid_mismatch, "image size mismatch");
    for (std::size_t i = 0; i < img.size(); ++i) sum_[i] += img[i];
    ++count_;
  }
  void merge(const MeanImage& o) {
    require(o.sum_.size() == sum_.size(), Errc::grid_mismatch, "image size mismatch");
    for (std::size_t i = 0; i < sum_.size(); ++i) sum_[i] += o.sum_[i];
    count_ += o.count_;
  }
  std::vector<double> mean() const {
    require(count_ > 0, Errc::invalid_argument, "mean of zero images");
    std::vector<double> m(sum_);
    for (auto& v : m) v /= static_cast<double>(count_);
    return m;
  }
  std::uint64_t count() const { return count_; }
  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }

 private:
  std::size_t nx_, ny_;
  std::vector<double> sum_;
  std::uint64_t count_ = 0;
};

/// Average over non-overlapping factor x factor blocks.
inline std::vector<double> block_average(std::span<const double> img, std::size_t nx, std::size_t ny,
                                         std::size_t factor) {
  require(factor >= 1 && nx % factor == 0 && ny % factor == 0, Errc::invalid_argument,
          "block factor must divide the image size");
  const std::size_t bx = nx / factor, by = ny / factor;
  std::vector<double> out(bx * by, 0.0);
  for (std::size_t y = 0; y < ny; ++y)
    for (std::size_t x = 0; x < nx; ++x) out[(y / factor) * bx + x / factor] += img[y * nx + x];
  for (auto& v : out) v /= static_cast<double>(factor * factor);
  return out;
}

inline double relative_l2(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), Errc::grid_mismatch, "image size mismatch");
  double d = 0.0, n = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d += (a[i] - b[i]) * (a[i] - b[i]);
    n += b[i] * b[i];
  }
  require(n > 0.0, Errc::degenerate_input, "reference image is zero");
  return std::sqrt(d / n);
}

}  // namespace qholo
