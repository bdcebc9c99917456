#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qholo/field.hpp"
#include "qholo/rng.hpp"

using namespace qholo;

namespace {

constexpr double kPi = std::numbers::pi;

ComplexField random_field(const Grid2D& g, std::uint64_t seed) {
  ComplexField f(g, nm_to_mm(710.0));
  KeyedStream rng(seed, 0, Arm::signal, Purpose::test);
  for (auto& a : f.data) a = cplx(rng.normal(), rng.normal());
  return f;
}

double rel_l2(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double d = 0.0, n = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d += std::norm(a[i] - b[i]);
    n += std::norm(b[i]);
  }
  return std::sqrt(d / n);
}

}  // namespace

TEST(Grid, RejectsNonPowerOfTwoAndSmallGrids) {
  EXPECT_THROW(Grid2D(48, 64, 0.1, 0.1), Error);
  EXPECT_THROW(Grid2D(16, 16, 0.1, 0.1), Error);
  EXPECT_THROW(Grid2D(64, 64, 0.0, 0.1), Error);
  EXPECT_NO_THROW(Grid2D(32, 64, 0.1, 0.2));
}

TEST(Grid, FrequencyPitchAndCentre) {
  const Grid2D g(256, 128, 1.0 / 32.0, 0.05);
  EXPECT_DOUBLE_EQ(g.dnu_x(), 1.0 / (256 * (1.0 / 32.0)));
  EXPECT_DOUBLE_EQ(g.dnu_y(), 1.0 / (128 * 0.05));
  EXPECT_DOUBLE_EQ(g.x_mm(128), 0.0);
  EXPECT_DOUBLE_EQ(g.nu_y(64), 0.0);
  EXPECT_DOUBLE_EQ(g.nu_max_x(), 16.0);
}

TEST(Fft, CentreImpulseGivesFlatSpectrum) {
  const Grid2D g = Grid2D::square(64, 0.05);
  ComplexField f(g, nm_to_mm(710.0));
  f.at(32, 32) = 1.0;
  const auto F = fft2_centered(f);
  EXPECT_EQ(F.plane, Plane::far_field);
  for (const auto& a : F.data) EXPECT_NEAR(std::abs(a), 1.0 / 64.0, 1e-15);
}

TEST(Fft, ParsevalAndRoundTrip) {
  const Grid2D g = Grid2D::square(128, 0.03);
  const auto f = random_field(g, 11);
  const auto F = fft2_centered(f);
  EXPECT_NEAR(F.power() / f.power(), 1.0, 1e-10);
  const auto back = ifft2_centered(F);
  EXPECT_LT(rel_l2(back.data, f.data), 1e-12);
}

TEST(Fft, RequiresNearFieldInput) {
  const Grid2D g = Grid2D::square(32, 0.1);
  ComplexField f(g, nm_to_mm(710.0), Plane::far_field);
  EXPECT_THROW(fft2_centered(f), Error);
}

TEST(Fft, GaussianSpectrumWidth) {
  // |a|^2 std sigma -> |A|^2 std 1/(4 pi sigma); amplitude std is sqrt(2) wider.
  const double sigma = 0.68;
  const Grid2D g = Grid2D::square(256, 0.1);  // 25.6 mm field, 0.039 mm^-1 bins
  const auto F = fft2_centered(gaussian_beam(g, sigma, nm_to_mm(355.0)));
  double w = 0.0, m2 = 0.0;
  for (std::size_t iy = 0; iy < g.ny(); ++iy)
    for (std::size_t ix = 0; ix < g.nx(); ++ix) {
      const double a = std::abs(F.at(ix, iy));
      w += a;
      m2 += a * g.nu_x(ix) * g.nu_x(ix);
    }
  const double amp_std = std::sqrt(m2 / w);
  const double expected = std::sqrt(2.0) / (4.0 * kPi * sigma);
  EXPECT_NEAR(amp_std / expected, 1.0, 0.02);
}

TEST(Lens, TiltLandsOnItsFrequency) {
  const Grid2D g = Grid2D::square(256, 1.0 / 32.0);
  for (double nu0 : {6.0, -3.25, 11.5}) {
    ComplexField f(g, nm_to_mm(710.0));
    for (std::size_t iy = 0; iy < g.ny(); ++iy)
      for (std::size_t ix = 0; ix < g.nx(); ++ix) f.at(ix, iy) = std::polar(1.0, 2 * kPi * nu0 * g.x_mm(ix));
    const auto F = lens_fourier_2f(f, 50.0);
    std::size_t best = 0;
    for (std::size_t i = 0; i < F.data.size(); ++i)
      if (std::abs(F.data[i]) > std::abs(F.data[best])) best = i;
    EXPECT_NEAR(g.nu_x(best % g.nx()), nu0, g.dnu_x());
    EXPECT_NEAR(g.nu_y(best / g.nx()), 0.0, g.dnu_y());
  }
}

TEST(Lens, DetectorCoordinate) {
  const Grid2D g = Grid2D::square(256, 1.0 / 32.0);
  const auto F = lens_fourier_2f(uniform_beam(g, nm_to_mm(710.0)), 50.0);
  EXPECT_DOUBLE_EQ(F.focal_length_mm, 50.0);
  // nu = 6 mm^-1 is bin 48 to the right of centre
  EXPECT_NEAR(F.r_det_x(128 + 48), 0.213, 5e-4);
  EXPECT_THROW(lens_fourier_2f(uniform_beam(g, nm_to_mm(710.0)), 0.0), Error);
}

TEST(Lens, RealEvenInputHasSymmetricSpectrum) {
  const Grid2D g = Grid2D::square(64, 0.05);
  ComplexField f(g, nm_to_mm(710.0));
  KeyedStream rng(5, 0, Arm::signal, Purpose::test);
  for (std::size_t iy = 1; iy < 64; ++iy)
    for (std::size_t ix = 1; ix < 64; ++ix) {
      if (f.at(ix, iy) != cplx{}) continue;
      const double v = rng.normal();
      f.at(ix, iy) = v;
      f.at(64 - ix, 64 - iy) = v;
    }
  const auto F = lens_fourier_2f(f, 50.0);
  for (std::size_t iy = 1; iy < 64; ++iy)
    for (std::size_t ix = 1; ix < 64; ++ix)
      EXPECT_NEAR(std::abs(F.at(ix, iy)), std::abs(F.at(64 - ix, 64 - iy)), 1e-10);
}

TEST(Propagation, ZeroDistanceIsIdentity) {
  const Grid2D g = Grid2D::square(64, 0.05);
  const auto f = random_field(g, 3);
  const auto p = propagate_angular_spectrum(f, 0.0);
  EXPECT_LT(rel_l2(p.data, f.data), 1e-12);
}

TEST(Propagation, ForwardBackRecoversInput) {
  const Grid2D g = Grid2D::square(128, 1.0 / 32.0);
  const auto f = gaussian_beam(g, 0.68, nm_to_mm(710.0));
  const auto p = propagate_angular_spectrum(propagate_angular_spectrum(f, 5.0), -5.0);
  EXPECT_LT(rel_l2(p.data, f.data), 1e-9);
}

TEST(Propagation, PreservesEnergyAndRejectsLongDistances) {
  const Grid2D g = Grid2D::square(128, 1.0 / 32.0);
  const auto f = random_field(g, 8);
  EXPECT_NEAR(propagate_angular_spectrum(f, 1.5).power() / f.power(), 1.0, 1e-10);
  EXPECT_THROW(propagate_angular_spectrum(f, 150.0), Error);
  ComplexField far(g, nm_to_mm(710.0), Plane::far_field);
  EXPECT_THROW(propagate_angular_spectrum(far, 1.0), Error);
}

TEST(Propagation, DefocusLeavesGaussianEnvelope) {
  // Rayleigh range of a 0.68 mm beam at 710 nm is metres; 1.5 mm changes nothing visible.
  const Grid2D g = Grid2D::square(256, 1.0 / 32.0);
  const auto f = gaussian_beam(g, 0.68, nm_to_mm(710.0));
  const auto p = propagate_angular_spectrum(f, 1.5);
  double worst = 0.0;
  const double peak = std::norm(f.at(128, 128));
  for (std::size_t i = 0; i < f.data.size(); ++i)
    worst = std::max(worst, std::abs(std::norm(p.data[i]) - std::norm(f.data[i])) / peak);
  EXPECT_LT(worst, 1e-3);
}

TEST(Beam, GaussianMoments) {
  EXPECT_NEAR(fwhm_to_sigma(1.6), 0.68, 0.005);
  const Grid2D g = Grid2D::square(256, 1.0 / 32.0);
  const double sigma = 0.68;
  const auto b = gaussian_beam(g, sigma, nm_to_mm(355.0));
  EXPECT_DOUBLE_EQ(std::abs(b.at(128, 128)), 1.0);
  double w = 0.0, m2 = 0.0;
  for (std::size_t iy = 0; iy < g.ny(); ++iy)
    for (std::size_t ix = 0; ix < g.nx(); ++ix) {
      const double I = std::norm(b.at(ix, iy));
      w += I;
      m2 += I * g.x_mm(ix) * g.x_mm(ix);
    }
  EXPECT_NEAR(std::sqrt(m2 / w) / sigma, 1.0, 0.01);
  // intensity at r = sigma is exp(-1/2) of the peak; sigma = 0.68 is not on
  // the grid, so use sigma = 0.75 = 24 pixels
  const auto c = gaussian_beam(g, 0.75, nm_to_mm(355.0));
  EXPECT_NEAR(std::norm(c.at(128 + 24, 128)), std::exp(-0.5), 1e-6);
  EXPECT_THROW(gaussian_beam(g, 0.05, nm_to_mm(355.0)), Error);
}
