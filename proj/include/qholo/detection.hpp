#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "qholo/error.hpp"
#include "qholo/field.hpp"
#include "qholo/rng.hpp"

namespace qholo {

struct DetectorParams {
  double eta = 1.0;             // per-photon detection efficiency
  double dark_prob = 0.0;       // per-pixel false count probability
  double gray_threshold = 0.0;  // camera units, grayscale ingestion only

  void validate() const {
    require(eta >= 0.0 && eta <= 1.0, Errc::invalid_argument, "eta must lie in [0, 1]");
    require(dark_prob >= 0.0 && dark_prob <= 1.0, Errc::invalid_argument,
            "dark_prob must lie in [0, 1]");
  }
};

/// One binary photodetection image (at most one count per pixel).
struct PhotonFrame {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> bits;
  std::uint64_t frame_index = 0;
  Arm arm = Arm::signal;

  PhotonFrame() = default;
  PhotonFrame(std::size_t w, std::size_t h, std::uint64_t index, Arm a)
      : width(w), height(h), bits(w * h, 0), frame_index(index), arm(a) {}

  std::uint8_t at(std::size_t x, std::size_t y) const { return bits[y * width + x]; }
  void set(std::size_t x, std::size_t y) { bits[y * width + x] = 1; }
  std::size_t count() const {
    std::size_t n = 0;
    for (auto b : bits) n += b;
    return n;
  }
};

/// Wigner handoff: photon-number estimate above the half-photon vacuum,
/// clipped at zero.
inline double wigner_intensity(cplx a) { return std::max(std::norm(a) - 0.5, 0.0); }

inline double detection_probability(double intensity, const DetectorParams& p) {
  const double photon = 1.0 - std::exp(-p.eta * intensity);
  return 1.0 - (1.0 - photon) * (1.0 - p.dark_prob);
}

inline PhotonFrame detect(const ComplexField& field, const DetectorParams& params,
                          std::uint64_t seed, std::uint64_t frame_index, Arm arm) {
  require(field.plane == Plane::far_field, Errc::plane_mismatch,
          "detection expects a far-field input");
  params.validate();
  PhotonFrame frame(field.grid.nx(), field.grid.ny(), frame_index, arm);
  KeyedStream rng(seed, frame_index, arm, Purpose::detection);
  for (std::size_t i = 0; i < field.data.size(); ++i) {
    const double p = detection_probability(wigner_intensity(field.data[i]), params);
    if (rng.uniform() < p) frame.bits[i] = 1;
  }
  return frame;
}

struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> values;
};

inline PhotonFrame threshold_grayscale(const GrayImage& gray, const DetectorParams& params,
                                       std::uint64_t frame_index = 0, Arm arm = Arm::signal) {
  require(gray.values.size() == gray.width * gray.height, Errc::invalid_argument,
          "gray image size does not match its dimensions");
  PhotonFrame frame(gray.width, gray.height, frame_index, arm);
  for (std::size_t i = 0; i < gray.values.size(); ++i) {
    require(std::isfinite(gray.values[i]), Errc::invalid_argument,
            "gray image contains non-finite pixels");
    if (gray.values[i] > params.gray_threshold) frame.bits[i] = 1;
  }
  return frame;
}

}  // namespace qholo
