#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qholo/oracle.hpp"

using namespace qholo;

namespace {

constexpr double kPi = std::numbers::pi;
const double kLp = nm_to_mm(355.0);

PhaseHologram dirac_holo(const Grid2D& g, double step = 0.5 * kPi) {
  return design_offaxis_binary(dirac_array_target(3, 1.5, g), 6.0, 0.0, step);
}

}  // namespace

TEST(Oracle, UniformPlateGivesPumpSpectrumAtZero) {
  const Grid2D g = Grid2D::square(128, 1.0 / 8.0);
  const auto m = analytic_coincidence_map(gaussian_beam(g, 0.68, kLp), uniform_hologram(g));
  EXPECT_NEAR(m.sum(), 1.0, 1e-12);
  std::size_t best = 0;
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m.values[i] > m.values[best]) best = i;
  EXPECT_EQ(best, m.index(64, 64));
  double m2 = 0.0;
  for (std::size_t iy = 0; iy < m.height; ++iy)
    for (std::size_t ix = 0; ix < m.width; ++ix) m2 += m.at(ix, iy) * m.nu_x(ix) * m.nu_x(ix);
  EXPECT_NEAR(std::sqrt(m2) / (1.0 / (4.0 * kPi * 0.68)), 1.0, 0.02);
}

TEST(Oracle, PiStepPlateEqualsUniform) {
  const Grid2D g = Grid2D::square(128, 1.0 / 32.0);
  const auto pump = gaussian_beam(g, 0.68, kLp);
  const auto a = analytic_coincidence_map(pump, dirac_holo(g, kPi));
  const auto b = analytic_coincidence_map(pump, uniform_hologram(g));
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a.values[i], b.values[i], 1e-12);
}

TEST(Oracle, ClassicalCoherentMapHasNoConjugateOrder) {
  // t itself gives one +1 order; t^2 gives the +-1 pair.
  const Grid2D g = Grid2D::square(128, 1.0 / 32.0);
  const auto pump = gaussian_beam(g, 0.68, kLp);
  const auto holo = design_offaxis_binary(dirac_array_target(1, 1.0, g), 6.0, 0.0, 0.5 * kPi);
  const auto q = analytic_coincidence_map(pump, holo);
  const auto c = classical_coherent_map(pump, holo);
  const double qp = window_sum(q, Window::box(6, 0, 0.5)), qm = window_sum(q, Window::box(-6, 0, 0.5));
  EXPECT_NEAR(qp / qm, 1.0, 1e-9);
  EXPECT_GT(window_sum(c, Window::box(0, 0, 0.5)), 0.1);
  EXPECT_LT(window_sum(q, Window::box(0, 0, 0.5)), 0.01);
}

TEST(Oracle, PointSymmetricForRealProducts) {
  const Grid2D g = Grid2D::square(128, 1.0 / 32.0);
  const auto m = analytic_coincidence_map(gaussian_beam(g, 0.68, kLp), dirac_holo(g));
  for (std::size_t iy = 1; iy < 128; ++iy)
    for (std::size_t ix = 1; ix < 128; ++ix) EXPECT_NEAR(m.at(ix, iy), m.at(128 - ix, 128 - iy), 1e-9);
}

TEST(Oracle, ConvolutionTheoremAgainstDirectDft) {
  // |FT(E t^2)|^2 against the circular convolution of the two spectra
  const std::size_t n = 32;
  const Grid2D g = Grid2D::square(n, 1.0 / 8.0);
  const auto pump = gaussian_beam(g, 0.5, kLp);
  const auto holo = design_offaxis_binary(dirac_array_target(1, 1.0, g), 1.0, 0.0, 0.5 * kPi);
  const auto t2 = transmission(holo, true);
  const auto P = fft2_centered(pump), T = fft2_centered(t2);
  std::vector<double> direct(n * n);
  double total = 0.0;
  for (std::size_t ky = 0; ky < n; ++ky)
    for (std::size_t kx = 0; kx < n; ++kx) {
      cplx acc{};
      for (std::size_t qy = 0; qy < n; ++qy)
        for (std::size_t qx = 0; qx < n; ++qx) {
          const std::size_t rx = (kx + n + n / 2 - qx) % n, ry = (ky + n + n / 2 - qy) % n;
          acc += P.at(qx, qy) * T.at(rx, ry);
        }
      direct[ky * n + kx] = std::norm(acc);
      total += std::norm(acc);
    }
  const auto m = analytic_coincidence_map(pump, holo);
  for (std::size_t i = 0; i < direct.size(); ++i) EXPECT_NEAR(m.values[i], direct[i] / total, 1e-8);
}

TEST(Oracle, Guards) {
  const Grid2D g = Grid2D::square(64, 1.0 / 16.0);
  const Grid2D h = Grid2D::square(128, 1.0 / 16.0);
  EXPECT_THROW(analytic_coincidence_map(gaussian_beam(g, 0.68, kLp), uniform_hologram(h)), Error);
  ComplexField zero(g, kLp);
  EXPECT_THROW(analytic_coincidence_map(zero, uniform_hologram(g)), Error);
}

TEST(Compare, IdenticalShiftedAndFlat) {
  const Grid2D g = Grid2D::square(128, 1.0 / 32.0);
  const auto m = analytic_coincidence_map(gaussian_beam(g, 0.68, kLp), dirac_holo(g));
  const auto same = compare_maps(m, m);
  EXPECT_DOUBLE_EQ(same.pearson, 1.0);
  EXPECT_DOUBLE_EQ(same.l2_rel, 0.0);

  // shift by 3 bins in y: the 12-bin lattice no longer overlaps itself
  FrequencyImage shifted(m.width, m.height, m.dnu_x, m.dnu_y);
  for (std::size_t iy = 0; iy + 3 < m.height; ++iy)
    for (std::size_t ix = 0; ix < m.width; ++ix) shifted.at(ix, iy + 3) = m.at(ix, iy);
  EXPECT_LT(std::abs(compare_maps(shifted, m).pearson), 0.1);

  FrequencyImage flat(m.width, m.height, m.dnu_x, m.dnu_y);
  for (auto& v : flat.values) v = 1.0;
  EXPECT_THROW(compare_maps(flat, m), Error);
  EXPECT_THROW(compare_maps(FrequencyImage(64, 64, 1, 1), m), Error);
}
