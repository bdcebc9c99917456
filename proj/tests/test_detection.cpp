#include <gtest/gtest.h>

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <cmath>

#include "qholo/detection.hpp"
#include "qholo/spdc.hpp"

using namespace qholo;

namespace {

const double kLs = nm_to_mm(710.0);

ComplexField far_vacuum(std::size_t n, std::uint64_t seed) {
  auto v = generate_vacuum(Grid2D::square(n, 0.01), kLs, seed, 0, Arm::signal);
  v.plane = Plane::far_field;
  return v;
}

double mean_rate(const PhotonFrame& f) {
  return static_cast<double>(f.count()) / static_cast<double>(f.bits.size());
}

}  // namespace

TEST(Detect, VacuumClippingBiasMatchesClosedForm) {
  // |a|^2 ~ Exp(mean 1/2): P(|a|^2 > 1/2) = 1/e and the excess is again
  // Exp(mean 1/2), so the count rate is e^-1 * eta m / (1 + eta m), m = 1/2.
  const auto v = far_vacuum(1024, 21);
  for (double eta : {0.05, 0.25, 1.0}) {
    DetectorParams p;
    p.eta = eta;
    const double rate = mean_rate(detect(v, p, 3, 0, Arm::signal));
    const double expected = std::exp(-1.0) * (0.5 * eta) / (1.0 + 0.5 * eta);
    EXPECT_NEAR(rate / expected, 1.0, 0.05) << "eta=" << eta;
  }
  DetectorParams low;
  low.eta = 0.05;
  EXPECT_LT(mean_rate(detect(v, low, 3, 0, Arm::signal)), 0.01);
}

TEST(Detect, BlindDetectorAndDarkCounts) {
  const auto v = far_vacuum(1024, 22);
  DetectorParams p;
  p.eta = 0.0;
  EXPECT_EQ(detect(v, p, 1, 0, Arm::signal).count(), 0u);
  p.dark_prob = 0.001;
  EXPECT_NEAR(mean_rate(detect(v, p, 1, 0, Arm::signal)) / 0.001, 1.0, 0.1);
}

TEST(Detect, EfficiencyIsMonotone) {
  // Same keyed uniforms: a higher eta can only add detections.
  const auto v = far_vacuum(256, 23);
  DetectorParams lo, hi;
  lo.eta = 0.2;
  hi.eta = 0.6;
  const auto a = detect(v, lo, 4, 2, Arm::idler);
  const auto b = detect(v, hi, 4, 2, Arm::idler);
  for (std::size_t i = 0; i < a.bits.size(); ++i) EXPECT_LE(a.bits[i], b.bits[i]);
  EXPECT_GT(b.count(), a.count());
}

TEST(Detect, BinaryReproducibleAndGuarded) {
  const auto v = far_vacuum(128, 24);
  DetectorParams p;
  p.eta = 1.0;
  const auto a = detect(v, p, 9, 5, Arm::signal);
  EXPECT_EQ(a.bits, detect(v, p, 9, 5, Arm::signal).bits);
  for (auto b : a.bits) EXPECT_LE(b, 1);
  auto near = v;
  near.plane = Plane::near_field;
  EXPECT_THROW(detect(near, p, 9, 5, Arm::signal), Error);
  p.eta = 1.5;
  EXPECT_THROW(detect(v, p, 9, 5, Arm::signal), Error);
}

TEST(Threshold, BasicMasks) {
  GrayImage g{4, 1, {0.0, 100.0, 0.0, 100.0}};
  DetectorParams p;
  p.gray_threshold = 50.0;
  const auto f = threshold_grayscale(g, p);
  EXPECT_EQ(f.bits, (std::vector<std::uint8_t>{0, 1, 0, 1}));
  p.gray_threshold = 200.0;
  EXPECT_EQ(threshold_grayscale(g, p).count(), 0u);
  g.values[2] = std::nan("");
  EXPECT_THROW(threshold_grayscale(g, p), Error);
}

TEST(Threshold, SyntheticEmccdStackRecoversRate) {
  // Poisson photons, gamma-distributed multiplication (shape = photons,
  // scale = gain), Gaussian read noise; threshold at 5 read-noise sigmas.
  const double rate = 0.05, gain = 1000.0, read = 10.0;
  DetectorParams p;
  p.gray_threshold = 5.0 * read;
  KeyedStream rng(31, 0, Arm::signal, Purpose::test);
  double detected = 0.0, pixels = 0.0;
  for (int k = 0; k < 20; ++k) {
    GrayImage g{256, 256, std::vector<double>(256 * 256)};
    for (auto& v : g.values) {
      const auto n = rng.poisson(rate);
      double e = 0.0;
      if (n > 0) {
        boost::random::gamma_distribution<double> gamma(static_cast<double>(n), gain);
        e = gamma(rng.engine());
      }
      v = e + rng.normal(0.0, read);
    }
    const auto f = threshold_grayscale(g, p, static_cast<std::uint64_t>(k));
    detected += static_cast<double>(f.count());
    pixels += static_cast<double>(f.bits.size());
  }
  EXPECT_NEAR(detected / pixels / rate, 1.0, 0.10);
}
