#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <map>
#include <numbers>

#include "qholo/oracle.hpp"
#include "qholo/spdc.hpp"

using namespace qholo;

namespace {

constexpr double kPi = std::numbers::pi;
const double kLp = nm_to_mm(355.0);
const double kLs = nm_to_mm(710.0);

double excess_photons(const ComplexField& f) {
  double s = 0.0;
  for (const auto& a : f.data) s += std::norm(a) - 0.5;
  return s / static_cast<double>(f.data.size());
}

}  // namespace

TEST(Vacuum, HalfPhotonPerModeZeroMean) {
  const Grid2D g = Grid2D::square(1024, 0.01);
  const auto v = generate_vacuum(g, kLs, 1, 0, Arm::signal);
  double n = 0.0;
  cplx m{};
  for (const auto& a : v.data) {
    n += std::norm(a);
    m += a;
  }
  const double count = static_cast<double>(v.data.size());
  EXPECT_NEAR(n / count, 0.5, 0.002);
  // each quadrature has std 1/2, so the mean of 2^20 samples has std 1/2048
  EXPECT_LT(std::abs(m.real() / count), 3.0 * 0.5 / 1024.0);
  EXPECT_LT(std::abs(m.imag() / count), 3.0 * 0.5 / 1024.0);
}

TEST(Vacuum, KeyedByFrameAndArm) {
  const Grid2D g = Grid2D::square(32, 0.05);
  EXPECT_EQ(generate_vacuum(g, kLs, 4, 9, Arm::idler).data, generate_vacuum(g, kLs, 4, 9, Arm::idler).data);
  EXPECT_NE(generate_vacuum(g, kLs, 4, 9, Arm::idler).data, generate_vacuum(g, kLs, 4, 9, Arm::signal).data);
  EXPECT_NE(generate_vacuum(g, kLs, 4, 9, Arm::idler).data, generate_vacuum(g, kLs, 4, 10, Arm::idler).data);
}

TEST(WignerPulse, NoGainIsIdentity) {
  const Grid2D g = Grid2D::square(64, 1.0 / 32.0);
  const auto vs = generate_vacuum(g, kLs, 2, 0, Arm::signal);
  const auto vi = generate_vacuum(g, kLs, 2, 0, Arm::idler);
  const auto out = wigner_pulse(vs, vi, uniform_beam(g, kLp), CrystalParams::bbo_type2(0.8, 0.0), 8);
  EXPECT_EQ(out.signal.data, vs.data);
  EXPECT_EQ(out.idler.data, vi.data);
}

TEST(WignerPulse, TwoModeSqueezerGain) {
  // Window +-2 mm^-1: phase mismatch over 0.8 mm is below 0.01 rad there.
  const Grid2D g = Grid2D::square(32, 0.25);
  const auto crystal = CrystalParams::bbo_type2(0.8, 0.2);
  const auto pump = uniform_beam(g, kLp);
  double mean = 0.0;
  const int frames = 10000;
  for (int k = 0; k < frames; ++k) {
    const auto vs = generate_vacuum(g, kLs, 3, k, Arm::signal);
    const auto vi = generate_vacuum(g, kLs, 3, k, Arm::idler);
    mean += excess_photons(wigner_pulse(vs, vi, pump, crystal, 8).signal) / frames;
  }
  const double expected = std::pow(std::sinh(0.2), 2);
  EXPECT_NEAR(mean / expected, 1.0, 0.05);
}

TEST(WignerPulse, EnergyGrowsWithGain) {
  const Grid2D g = Grid2D::square(64, 1.0 / 32.0);
  const auto pump = gaussian_beam(g, 0.5, kLp);
  const auto vs = generate_vacuum(g, kLs, 5, 1, Arm::signal);
  const auto vi = generate_vacuum(g, kLs, 5, 1, Arm::idler);
  double prev = excess_photons(vs) + excess_photons(vi);
  for (double g0 : {0.1, 0.2, 0.3, 0.4, 0.5}) {
    const auto out = wigner_pulse(vs, vi, pump, CrystalParams::bbo_type2(0.8, g0), 8);
    const double e = excess_photons(out.signal) + excess_photons(out.idler);
    EXPECT_GT(e, prev);
    prev = e;
  }
  EXPECT_GT(prev, 0.0);
}

TEST(WignerPulse, Guards) {
  const Grid2D g = Grid2D::square(32, 0.05);
  const Grid2D h = Grid2D::square(64, 0.05);
  const auto vs = generate_vacuum(g, kLs, 1, 0, Arm::signal);
  const auto vi = generate_vacuum(g, kLs, 1, 0, Arm::idler);
  const auto c = CrystalParams::bbo_type2(0.8, 0.3);
  EXPECT_THROW(wigner_pulse(vs, vi, uniform_beam(h, kLp), c, 8), Error);
  EXPECT_THROW(wigner_pulse(vs, vi, uniform_beam(g, kLp), c, 3), Error);
  auto strong = uniform_beam(g, kLp);
  for (auto& e : strong.data) e *= 2.0;  // g0 * peak / steps = 0.25
  EXPECT_THROW(wigner_pulse(vs, vi, strong, CrystalParams::bbo_type2(0.8, 0.5), 4), Error);
  auto bad = c;
  bad.signal_wavelength_mm = nm_to_mm(700.0);
  EXPECT_THROW(bad.validate(), Error);
  bad = c;
  bad.g0 = 0.6;
  EXPECT_THROW(bad.validate(), Error);
}

TEST(PropagateArm, TransparentPlateIsLensTransform) {
  const Grid2D g = Grid2D::square(64, 1.0 / 32.0);
  const auto f = generate_vacuum(g, kLs, 7, 0, Arm::signal);
  const auto plate = uniform_hologram(g);
  const auto a = propagate_arm(f, &plate, 0.0, 50.0);
  const auto b = lens_fourier_2f(f, 50.0);
  for (std::size_t i = 0; i < a.data.size(); ++i) EXPECT_NEAR(std::abs(a.data[i] - b.data[i]), 0.0, 1e-14);
  EXPECT_THROW(propagate_arm(b, &plate, 0.0, 50.0), Error);
}

TEST(PropagateArm, DefocusChangesAmplitudesNotEnergy) {
  const Grid2D g = Grid2D::square(128, 1.0 / 32.0);
  const auto holo = design_offaxis_binary(dirac_array_target(3, 1.5, g), 6.0, 0.0, 0.5 * kPi);
  const auto f = generate_vacuum(g, kLs, 8, 0, Arm::signal);
  const auto a = propagate_arm(f, &holo, 0.0, 50.0);
  const auto b = propagate_arm(f, &holo, 1.5, 50.0);
  double d = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) d += std::norm(a.data[i] - b.data[i]);
  EXPECT_GT(d, 0.0);
  EXPECT_NEAR(a.power() / b.power(), 1.0, 1e-9);
}

TEST(PropagateArm, NoHologramImageInSingles) {
  // Delta-correlated light through the pi/2 plate: the mean far field stays flat.
  const Grid2D g = Grid2D::square(64, 1.0 / 16.0);
  const auto holo = design_offaxis_binary(dirac_array_target(3, 1.0, g), 4.0, 0.0, 0.5 * kPi);
  std::vector<double> mean(g.size(), 0.0);
  const int frames = 2000;
  for (int k = 0; k < frames; ++k) {
    const auto far = propagate_arm(generate_vacuum(g, kLs, 9, k, Arm::signal), &holo, 0.0, 50.0);
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += std::norm(far.data[i]) / frames;
  }
  double m = 0.0, v = 0.0;
  for (double x : mean) m += x / static_cast<double>(mean.size());
  for (double x : mean) v += (x - m) * (x - m) / static_cast<double>(mean.size());
  // exponential intensities: per-pixel std of the mean is m / sqrt(frames)
  EXPECT_NEAR(std::sqrt(v) / (m / std::sqrt(frames)), 1.0, 0.1);
  EXPECT_NEAR(m, 0.5, 0.01);
}

TEST(PairSampler, PerfectPairingGivesEqualCounts) {
  // PDF on the sum pixel (-1, -1): every idler lands on the sensor.
  const std::size_t n = 64;
  FrequencyImage pdf(n, n, 0.25, 0.25);
  pdf.at(n / 2 - 1, n / 2 - 1) = 1.0;
  const PairSampler s(pdf, {3.0, 1.0, 0.0});
  for (std::uint64_t k = 0; k < 200; ++k) {
    const auto f = s.frame(1, k);
    EXPECT_EQ(f.signal.count(), f.idler.count()) << "frame " << k;
  }
}

TEST(PairSampler, SumHistogramMatchesPdf) {
  const Grid2D g = Grid2D::square(64, 1.0 / 16.0);
  const auto holo = design_offaxis_binary(dirac_array_target(3, 1.0, g), 4.0, 0.0, 0.5 * kPi);
  const auto pdf = analytic_coincidence_map(gaussian_beam(g, 0.5, kLp), holo);
  const PairSampler s(pdf, {1.0, 1.0, 0.0});
  KeyedStream rng(99, 0, Arm::signal, Purpose::test);
  const int draws = 1000000;
  std::map<std::size_t, double> hist;
  for (int k = 0; k < draws; ++k) {
    const auto [dx, dy] = s.sample_sum(rng);
    hist[static_cast<std::size_t>((dy + 32) * 64 + (dx + 32))] += 1.0;
  }
  // chi-square over bins with expected >= 5, the rest pooled
  double chi2 = 0.0, pooled_e = 0.0, pooled_o = 0.0;
  int dof = -1;
  for (std::size_t i = 0; i < pdf.size(); ++i) {
    const double e = pdf.values[i] * draws;
    const double o = hist.count(i) ? hist[i] : 0.0;
    if (e >= 5.0) {
      chi2 += (o - e) * (o - e) / e;
      ++dof;
    } else {
      pooled_e += e;
      pooled_o += o;
    }
  }
  if (pooled_e > 0.0) {
    chi2 += (pooled_o - pooled_e) * (pooled_o - pooled_e) / pooled_e;
    ++dof;
  }
  const double p = boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), chi2));
  EXPECT_GT(p, 0.01) << "chi2=" << chi2 << " dof=" << dof;
}

TEST(PairSampler, SinglesAreUniformUnderStructuredMap) {
  const Grid2D g = Grid2D::square(64, 1.0 / 16.0);
  const auto holo = design_offaxis_binary(dirac_array_target(3, 1.0, g), 4.0, 0.0, 0.5 * kPi);
  const PairSampler s(analytic_coincidence_map(gaussian_beam(g, 0.5, kLp), holo), {200.0, 1.0, 0.0});
  std::vector<double> counts(64, 0.0);  // column histogram of the signal arm
  const int frames = 2000;
  for (int k = 0; k < frames; ++k) {
    const auto f = s.frame(5, k);
    for (std::size_t i = 0; i < f.signal.bits.size(); ++i) counts[i % 64] += f.signal.bits[i];
  }
  double total = 0.0;
  for (double c : counts) total += c;
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - total / 64) * (c - total / 64) / (total / 64);
  const double p = boost::math::cdf(boost::math::complement(boost::math::chi_squared(63), chi2));
  EXPECT_GT(p, 0.001);
}

TEST(PairSampler, BackgroundAndGuards) {
  FrequencyImage pdf(32, 32, 0.25, 0.25);
  EXPECT_THROW(PairSampler(pdf, {10.0, 0.5, 0.0}), Error);
  pdf.at(16, 16) = 1.0;
  EXPECT_THROW(PairSampler(pdf, {0.0, 0.5, 0.0}), Error);
  EXPECT_THROW(PairSampler(pdf, {1.0, 1.5, 0.0}), Error);
  const PairSampler bg(pdf, {1e-9, 0.0, 5.0});
  double total = 0.0;
  for (int k = 0; k < 2000; ++k) total += static_cast<double>(bg.frame(2, k).idler.count());
  EXPECT_NEAR(total / 2000.0, 5.0, 0.25);
  EXPECT_EQ(bg.frame(2, 17).signal.bits, bg.frame(2, 17).signal.bits);
}

TEST(WignerEngine, FramesAreReproducible) {
  const Grid2D g = Grid2D::square(32, 1.0 / 16.0);
  const auto holo = design_offaxis_binary(dirac_array_target(1, 1.0, g), 4.0, 0.0, 0.5 * kPi);
  const WignerEngine e(gaussian_beam(g, 0.5, kLp), CrystalParams::bbo_type2(0.8, 0.4), holo, 1.5, 50.0, 8);
  DetectorParams det;
  det.eta = 0.5;
  const auto a = e.frames(11, 3, det);
  const auto b = e.frames(11, 3, det);
  EXPECT_EQ(a.signal.bits, b.signal.bits);
  EXPECT_EQ(a.idler.bits, b.idler.bits);
  EXPECT_EQ(a.idler.arm, Arm::idler);
}
