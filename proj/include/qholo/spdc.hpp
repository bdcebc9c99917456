#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "qholo/crystal.hpp"
#include "qholo/detection.hpp"
#include "qholo/error.hpp"
#include "qholo/field.hpp"
#include "qholo/holography.hpp"
#include "qholo/image.hpp"
#include "qholo/rng.hpp"

namespace qholo {

enum class EngineKind { wigner, pair_sampling };

struct SimConfig {
  EngineKind engine = EngineKind::pair_sampling;
  std::uint64_t frames = 1000;
  std::uint64_t master_seed = 1;
  double defocus_mm = 0.0;
  double eta = 0.25;
  double mean_pairs_per_frame = 400.0;  // pair_sampling only
  double background_per_frame = 0.0;    // pair_sampling only, per arm
  int split_steps = 8;                  // wigner only

  void validate() const {
    require(frames >= 1, Errc::invalid_argument, "frames must be >= 1");
    require(eta >= 0.0 && eta <= 1.0, Errc::invalid_argument, "eta must lie in [0, 1]");
    require(mean_pairs_per_frame > 0.0, Errc::invalid_argument, "mean pairs must be positive");
    require(background_per_frame >= 0.0, Errc::invalid_argument, "background must be >= 0");
    require(split_steps >= 4, Errc::invalid_argument, "split_steps must be >= 4");
  }
};

struct FieldPair {
  ComplexField signal;
  ComplexField idler;
};

struct FramePair {
  PhotonFrame signal;
  PhotonFrame idler;
};

/// Wigner vacuum: circular complex Gaussian per pixel with <|a|^2> = 1/2.
inline ComplexField generate_vacuum(const Grid2D& grid, double wavelength_mm,
                                    std::uint64_t seed, std::uint64_t frame_index, Arm arm) {
  ComplexField out(grid, wavelength_mm);
  KeyedStream rng(seed, frame_index, arm, Purpose::vacuum);
  for (auto& v : out.data) {
    const double re = rng.normal(0.0, 0.5);
    const double im = rng.normal(0.0, 0.5);
    v = cplx(re, im);
  }
  return out;
}

namespace detail {

inline std::vector<cplx> diffraction_kernel(const Grid2D& grid, double wavelength_in_medium_mm,
                                            double dz_mm) {
  std::vector<cplx> k(grid.size(), cplx(1.0, 0.0));
  apply_angular_spectrum(k, grid, wavelength_in_medium_mm, dz_mm);
  return k;
}

inline void diffract(std::vector<cplx>& a, const Grid2D& grid, const std::vector<cplx>& kernel) {
  fft::centered(a, grid.nx(), grid.ny(), fft::Direction::forward);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] *= kernel[i];
  fft::centered(a, grid.nx(), grid.ny(), fft::Direction::inverse);
}

}  // namespace detail

/// Symmetric split-step integration of the coupled signal/idler equations
///   da_s/dz = (g0/L) E_p conj(a_i),  da_i/dz = (g0/L) E_p conj(a_s)
/// through the crystal, alternating paraxial diffraction of each arm (in
/// the medium) with the local coupling, which is integrated exactly over
/// each step. The outputs are referred back to the crystal mid-plane, the
/// plane the relay images onto the hologram.
inline FieldPair wigner_pulse(const ComplexField& vac_s, const ComplexField& vac_i,
                              const ComplexField& pump, const CrystalParams& crystal,
                              int split_steps) {
  crystal.validate();
  require(vac_s.grid == vac_i.grid && vac_s.grid == pump.grid, Errc::grid_mismatch,
          "signal, idler and pump must share one grid");
  require(vac_s.plane == Plane::near_field && vac_i.plane == Plane::near_field &&
              pump.plane == Plane::near_field,
          Errc::plane_mismatch, "wigner_pulse works on near-field inputs");
  require(split_steps >= 4, Errc::invalid_argument, "split_steps must be >= 4");

  double pump_peak = 0.0;
  for (const auto& e : pump.data) pump_peak = std::max(pump_peak, std::abs(e));
  const double step_gain = crystal.g0 * pump_peak / split_steps;
  require(step_gain <= 0.2, Errc::invalid_argument,
          "per-step gain above 0.2; increase split_steps");

  FieldPair out{vac_s, vac_i};
  if (crystal.g0 == 0.0) return out;

  const Grid2D& grid = pump.grid;
  const double h = crystal.length_mm / split_steps;
  const double ls = crystal.signal_wavelength_mm / crystal.n_signal;
  const double li = crystal.signal_wavelength_mm / crystal.n_idler;
  const auto half_s = detail::diffraction_kernel(grid, ls, 0.5 * h);
  const auto half_i = detail::diffraction_kernel(grid, li, 0.5 * h);
  const auto full_s = detail::diffraction_kernel(grid, ls, h);
  const auto full_i = detail::diffraction_kernel(grid, li, h);
  // Final half step combined with the return to the mid-plane (-L/2).
  const auto exit_s = detail::diffraction_kernel(grid, ls, 0.5 * h - 0.5 * crystal.length_mm);
  const auto exit_i = detail::diffraction_kernel(grid, li, 0.5 * h - 0.5 * crystal.length_mm);

  std::vector<double> ch(grid.size()), sh(grid.size());
  std::vector<cplx> rot(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double gamma = crystal.g0 * std::abs(pump.data[i]) * h / crystal.length_mm;
    ch[i] = std::cosh(gamma);
    sh[i] = std::sinh(gamma);
    rot[i] = std::abs(pump.data[i]) > 0.0 ? pump.data[i] / std::abs(pump.data[i]) : cplx(1.0, 0.0);
  }

  auto& as = out.signal.data;
  auto& ai = out.idler.data;
  detail::diffract(as, grid, half_s);
  detail::diffract(ai, grid, half_i);
  for (int step = 0; step < split_steps; ++step) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const cplx s0 = as[i];
      const cplx i0 = ai[i];
      as[i] = ch[i] * s0 + rot[i] * sh[i] * std::conj(i0);
      ai[i] = ch[i] * i0 + rot[i] * sh[i] * std::conj(s0);
    }
    const bool last = step + 1 == split_steps;
    detail::diffract(as, grid, last ? exit_s : full_s);
    detail::diffract(ai, grid, last ? exit_i : full_i);
  }
  return out;
}

/// Crystal image plane -> (defocus) -> hologram -> 2-f lens -> detector.
/// Each photon sees t once; t^2 only appears in the pair correlation.
inline ComplexField propagate_arm(const ComplexField& field, const PhaseHologram* holo,
                                  double dz_mm, double focal_length_mm) {
  require(field.plane == Plane::near_field, Errc::plane_mismatch,
          "propagate_arm expects a near-field input at the crystal image plane");
  ComplexField at_holo = propagate_angular_spectrum(field, dz_mm);
  if (holo != nullptr) {
    require(holo->grid == field.grid, Errc::grid_mismatch, "hologram grid differs from field grid");
    const ComplexField t = transmission(*holo, /*squared=*/false);
    for (std::size_t i = 0; i < at_holo.data.size(); ++i) at_holo.data[i] *= t.data[i];
  }
  return lens_fourier_2f(at_holo, focal_length_mm);
}

/// Full per-pulse field simulation. Immutable after construction; frames
/// depend only on (seed, frame index).
class WignerEngine {
 public:
  WignerEngine(ComplexField pump, CrystalParams crystal, std::optional<PhaseHologram> hologram,
               double defocus_mm, double focal_length_mm, int split_steps)
      : pump_(std::move(pump)),
        crystal_(crystal),
        hologram_(std::move(hologram)),
        defocus_mm_(defocus_mm),
        focal_length_mm_(focal_length_mm),
        split_steps_(split_steps) {
    crystal_.validate();
    require(focal_length_mm > 0.0, Errc::invalid_argument, "focal length must be positive");
    require(split_steps >= 4, Errc::invalid_argument, "split_steps must be >= 4");
    if (hologram_)
      require(hologram_->grid == pump_.grid, Errc::grid_mismatch,
              "hologram grid differs from pump grid");
  }

  const Grid2D& grid() const { return pump_.grid; }

  /// Crystal mid-plane fields after the pulse.
  FieldPair crystal_output(std::uint64_t seed, std::uint64_t frame) const {
    const double lambda = crystal_.signal_wavelength_mm;
    auto vs = generate_vacuum(grid(), lambda, seed, frame, Arm::signal);
    auto vi = generate_vacuum(grid(), lambda, seed, frame, Arm::idler);
    return wigner_pulse(vs, vi, pump_, crystal_, split_steps_);
  }

  FieldPair detector_fields(const FieldPair& crystal_fields, const PhaseHologram* holo) const {
    return {propagate_arm(crystal_fields.signal, holo, defocus_mm_, focal_length_mm_),
            propagate_arm(crystal_fields.idler, holo, defocus_mm_, focal_length_mm_)};
  }

  FieldPair detector_fields(std::uint64_t seed, std::uint64_t frame) const {
    return detector_fields(crystal_output(seed, frame), hologram_ ? &*hologram_ : nullptr);
  }

  FramePair frames(std::uint64_t seed, std::uint64_t frame, const DetectorParams& det) const {
    auto f = detector_fields(seed, frame);
    return {detect(f.signal, det, seed, frame, Arm::signal),
            detect(f.idler, det, seed, frame, Arm::idler)};
  }

  const std::optional<PhaseHologram>& hologram() const { return hologram_; }

 private:
  ComplexField pump_;
  CrystalParams crystal_;
  std::optional<PhaseHologram> hologram_;
  double defocus_mm_;
  double focal_length_mm_;
  int split_steps_;
};

struct PairSamplingParams {
  double mean_pairs = 400.0;
  double eta = 0.25;
  double background_per_frame = 0.0;
};

/// Direct photon-pair sampler. The biphoton amplitude depends only on the
/// sum coordinate, so a pair is drawn as (sum from the coincidence PDF,
/// signal position uniform), idler = sum - signal. When the idler falls off
/// the sensor the pair is broken: the signal photon is still recorded, unpaired.
class PairSampler {
 public:
  PairSampler(const FrequencyImage& pdf, PairSamplingParams params)
      : width_(pdf.width), height_(pdf.height), params_(params), cdf_(pdf.size()) {
    require(params.mean_pairs > 0.0, Errc::invalid_argument, "mean_pairs must be positive");
    require(params.eta >= 0.0 && params.eta <= 1.0, Errc::invalid_argument,
            "eta must lie in [0, 1]");
    require(params.background_per_frame >= 0.0, Errc::invalid_argument,
            "background must be >= 0");
    double acc = 0.0;
    for (std::size_t i = 0; i < pdf.size(); ++i) {
      require(pdf.values[i] >= 0.0 && std::isfinite(pdf.values[i]), Errc::invalid_argument,
              "coincidence PDF must be finite and non-negative");
      acc += pdf.values[i];
      cdf_[i] = acc;
    }
    require(acc > 0.0, Errc::degenerate_input, "coincidence PDF is empty");
    for (auto& c : cdf_) c /= acc;
  }

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }

  /// Sum coordinate in pixels relative to the zero-sum pixel.
  std::pair<std::ptrdiff_t, std::ptrdiff_t> sample_sum(KeyedStream& rng) const {
    const double u = rng.uniform();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    auto i = static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cdf_.begin(), cdf_.size() - 1));
    return {static_cast<std::ptrdiff_t>(i % width_) - static_cast<std::ptrdiff_t>(width_ / 2),
            static_cast<std::ptrdiff_t>(i / width_) - static_cast<std::ptrdiff_t>(height_ / 2)};
  }

  FramePair frame(std::uint64_t seed, std::uint64_t frame_index) const {
    FramePair out{PhotonFrame(width_, height_, frame_index, Arm::signal),
                  PhotonFrame(width_, height_, frame_index, Arm::idler)};
    KeyedStream rng(seed, frame_index, Arm::signal, Purpose::pair_sampling);
    const auto hx = static_cast<std::ptrdiff_t>(width_ / 2);
    const auto hy = static_cast<std::ptrdiff_t>(height_ / 2);
    const auto pairs = rng.poisson(params_.mean_pairs);
    for (std::uint64_t k = 0; k < pairs; ++k) {
      const auto [sx, sy] = sample_sum(rng);
      const auto x1 = static_cast<std::ptrdiff_t>(rng.uniform() * static_cast<double>(width_));
      const auto y1 = static_cast<std::ptrdiff_t>(rng.uniform() * static_cast<double>(height_));
      const bool det_s = rng.uniform() < params_.eta;
      const bool det_i = rng.uniform() < params_.eta;
      // Sensor coordinates relative to centre: c = pixel - n/2.
      const auto x2 = sx - (x1 - hx) + hx;
      const auto y2 = sy - (y1 - hy) + hy;
      if (det_s) out.signal.set(static_cast<std::size_t>(x1), static_cast<std::size_t>(y1));
      if (x2 < 0 || y2 < 0 || x2 >= static_cast<std::ptrdiff_t>(width_) ||
          y2 >= static_cast<std::ptrdiff_t>(height_))
        continue;
      if (det_i) out.idler.set(static_cast<std::size_t>(x2), static_cast<std::size_t>(y2));
    }
    add_background(out.signal, seed, frame_index, Arm::signal);
    add_background(out.idler, seed, frame_index, Arm::idler);
    return out;
  }

 private:
  void add_background(PhotonFrame& f, std::uint64_t seed, std::uint64_t frame_index, Arm arm) const {
    if (params_.background_per_frame <= 0.0) return;
    KeyedStream rng(seed, frame_index, arm, Purpose::background);
    const auto n = rng.poisson(params_.background_per_frame);
    for (std::uint64_t k = 0; k < n; ++k) {
      const auto x = static_cast<std::size_t>(rng.uniform() * static_cast<double>(width_));
      const auto y = static_cast<std::size_t>(rng.uniform() * static_cast<double>(height_));
      f.set(std::min(x, width_ - 1), std::min(y, height_ - 1));
    }
  }

  std::size_t width_;
  std::size_t height_;
  PairSamplingParams params_;
  std::vector<double> cdf_;
};

inline FramePair pair_sample_frame(const FrequencyImage& pdf, double mean_pairs, double eta,
                                   std::uint64_t seed, std::uint64_t frame_index,
                                   double background_per_frame = 0.0) {
  return PairSampler(pdf, {mean_pairs, eta, background_per_frame}).frame(seed, frame_index);
}

}  // namespace qholo
