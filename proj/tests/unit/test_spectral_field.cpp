#include <cmath>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "qshaper/entanglement.hpp"
#include "qshaper/spectral_field.hpp"

using namespace qshaper;
using namespace qshaper::testing;

TEST(SpectralGrid, OddSymmetricAndCentered) {
  const auto g = SpectralGrid::symmetric(101, 0.35);
  EXPECT_EQ(g.center_index(), 50);
  EXPECT_DOUBLE_EQ(g.omega(g.center_index()), 0.0);
  for (int k = 0; k < g.size(); ++k) EXPECT_NEAR(g.omega(k), -g.omega(g.size() - 1 - k), 1e-15);
  EXPECT_NEAR(g.spacing(), 0.007, 1e-15);
}

TEST(SpectralGrid, RejectsBadShapes) {
  EXPECT_THROW(SpectralGrid::symmetric(100, 0.35), GridError);
  EXPECT_THROW(SpectralGrid::symmetric(1, 0.35), GridError);
  EXPECT_THROW(SpectralGrid(101, -0.2, 0.35), GridError);
  EXPECT_THROW(SpectralGrid(101, 0.1, 0.35), GridError);
}

TEST(Units, Conversions) {
  EXPECT_NEAR(units::angular_bandwidth_from_mhz(5.0), 2 * M_PI * 5e6 * 1e-15, 1e-22);
  const double w = units::angular_frequency_from_wavelength_nm(1064.0);
  EXPECT_NEAR(w, 1.7704, 1e-4);
  EXPECT_NEAR(units::wavelength_nm_from_angular_frequency(w), 1064.0, 1e-9);
  const double dw = units::angular_bandwidth_from_nm(105.0, 1064.0);
  EXPECT_NEAR(units::bandwidth_nm_from_angular(dw, 1064.0), 105.0, 1e-9);
}

TEST(PumpEnvelope, IntensityFwhm) {
  const PumpSpec pump{0.02, 532.0};
  EXPECT_DOUBLE_EQ(pump_envelope(0.0, pump), 1.0);
  const double at_half = pump_envelope(0.01, pump);
  EXPECT_NEAR(at_half * at_half, 0.5, 1e-12);
}

TEST(PhaseMatching, PerfectAtDegeneracyForBothRoles) {
  EXPECT_NEAR(phase_matching(0.0, 0.0, spdc_crystal()).real(), 1.0, 1e-12);
  EXPECT_NEAR(phase_matching(0.0, 0.0, sfg_crystal()).real(), 1.0, 1e-12);
  // SFG acceptance is the mirror image of SPDC emission
  for (double w : {0.01, 0.05, 0.1})
    EXPECT_NEAR(phase_matching(w, -w, spdc_crystal()).real(), phase_matching(w, -w, sfg_crystal()).real(), 1e-12);
}

TEST(PhaseMatching, SincZeroAtPredictedDetuning) {
  // x = a2·(2ω)²·L/2 = π at the first zero
  const double w = std::sqrt(units::pi / (default_a2 * 4.0 * 11.5 / 2.0));
  EXPECT_NEAR(phase_matching(w, -w, spdc_crystal()).real(), 0.0, 1e-12);
}

TEST(PhaseMatching, OptionalPhaseFactor) {
  const auto c = spdc_crystal();
  const cdouble with = phase_matching(0.05, -0.05, c, true);
  const cdouble without = phase_matching(0.05, -0.05, c, false);
  EXPECT_NEAR(std::abs(with), std::abs(without), 1e-12);
  EXPECT_EQ(without.imag(), 0.0);
}

TEST(Sellmeier, ValidityWindow) {
  Sellmeier s{4.5, 0.08, 0.04, 0.02, 0.4, 5.0, units::angular_frequency_from_wavelength_nm(532.0)};
  EXPECT_GT(s.index(1.064), 1.0);
  EXPECT_THROW(s.index(0.3), DomainError);
  EXPECT_THROW(s.index(6.0), DomainError);
}

TEST(JointAmplitude, NormalizedSymmetricReal) {
  const auto amp = gamma_amplitude(257);
  EXPECT_NEAR(amp.norm(), 1.0, 1e-12);
  EXPECT_TRUE(amp.is_real());
  EXPECT_LT(amp.symmetry_defect(), 1e-12);
  EXPECT_EQ(amp.kind(), AmplitudeKind::gamma);
  EXPECT_TRUE(amp.metadata().pump_clamped);
  EXPECT_NEAR(amp.metadata().effective_pump_bandwidth, 3 * amp.grid().spacing(), 1e-15);
}

TEST(JointAmplitude, LambdaWithoutDetectionCrystal) {
  const auto g = SpectralGrid::symmetric(257, 0.35);
  const auto amp = build_joint_amplitude(g, PumpSpec{0.05, 532.0}, spdc_crystal());
  EXPECT_EQ(amp.kind(), AmplitudeKind::lambda);
  EXPECT_FALSE(amp.metadata().pump_clamped);
}

TEST(JointAmplitude, CoarseGridRaisesResolutionError) {
  const auto g = SpectralGrid::symmetric(15, 0.35);
  EXPECT_THROW(build_joint_amplitude(g, cw_pump(), spdc_crystal(), sfg_crystal()), ResolutionError);
}

TEST(JointAmplitude, RoleMismatchRejected) {
  const auto g = SpectralGrid::symmetric(257, 0.35);
  EXPECT_THROW(build_joint_amplitude(g, cw_pump(), sfg_crystal()), DomainError);
  EXPECT_THROW(build_joint_amplitude(g, cw_pump(), spdc_crystal(), spdc_crystal()), DomainError);
}

TEST(JointAmplitude, VanishingOrNonFiniteRejected) {
  const auto g = SpectralGrid::symmetric(11, 0.35);
  EXPECT_THROW(JointAmplitude(g, Eigen::MatrixXcd::Zero(11, 11), AmplitudeKind::lambda), DomainError);
  Eigen::MatrixXcd bad = Eigen::MatrixXcd::Ones(11, 11);
  bad(3, 3) = std::nan("");
  EXPECT_THROW(JointAmplitude(g, bad, AmplitudeKind::lambda), DomainError);
  EXPECT_THROW(JointAmplitude(g, Eigen::MatrixXcd::Ones(9, 11), AmplitudeKind::lambda), GridError);
}

namespace {

// Separable Gaussian exp(−ω_i²/2s² − ω_s²/2s²); blurring with a Gaussian of
// standard deviation k gives standard deviation √(s² + k²) on each axis.
JointAmplitude separable_gaussian(const SpectralGrid& g, double s) {
  const int n = g.size();
  Eigen::MatrixXcd v(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      v(i, j) = std::exp(-(g.omega(i) * g.omega(i) + g.omega(j) * g.omega(j)) / (2 * s * s));
  return JointAmplitude(g, v, AmplitudeKind::gamma);
}

}  // namespace

TEST(Psf, GaussianConvolutionMatchesClosedForm) {
  const auto g = SpectralGrid::symmetric(401, 0.35);
  const double s = 0.02;
  const double width = 0.03;
  // exp(−ω²·2ln2/Δ²) has standard deviation Δ/(2√ln2)
  const double k = width / (2.0 * std::sqrt(std::log(2.0)));
  const auto blurred = apply_psf(separable_gaussian(g, s), width);
  const auto expected = separable_gaussian(g, std::sqrt(s * s + k * k));
  const double peak = expected.values().cwiseAbs().maxCoeff();
  EXPECT_LT((blurred.values() - expected.values()).cwiseAbs().maxCoeff(), 1e-9 * peak);
  EXPECT_EQ(blurred.kind(), AmplitudeKind::gamma_psf);
  EXPECT_NEAR(blurred.norm(), 1.0, 1e-12);
}

TEST(Psf, ZeroWidthIsIdentity) {
  const auto amp = gamma_amplitude(129);
  const auto same = apply_psf(amp, 0.0);
  EXPECT_LT((same.values() - amp.values()).cwiseAbs().maxCoeff(), 1e-12 * amp.values().cwiseAbs().maxCoeff());
  EXPECT_THROW(apply_psf(amp, -1.0), DomainError);
}

TEST(Psf, LinearNotCircular) {
  // mass at one corner must not leak to the opposite edge
  const auto g = SpectralGrid::symmetric(101, 0.35);
  Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(101, 101);
  v(0, 0) = 1.0;
  const auto out = apply_psf(JointAmplitude(g, v, AmplitudeKind::gamma), 0.02);
  EXPECT_LT(std::abs(out.values()(100, 100)), 1e-12 * std::abs(out.values()(0, 0)));
  EXPECT_LT(std::abs(out.values()(0, 100)), 1e-12 * std::abs(out.values()(0, 0)));
}

TEST(Psf, SubresolutionFlagged) {
  const auto amp = gamma_amplitude(129);
  EXPECT_TRUE(apply_psf(amp, 0.1 * amp.grid().spacing()).metadata().psf_subresolution);
  EXPECT_FALSE(apply_psf(amp, 5 * amp.grid().spacing()).metadata().psf_subresolution);
}

TEST(Psf, PreservesSymmetry) {
  const auto amp = gamma_psf_amplitude(257);
  EXPECT_LT(amp.symmetry_defect(), 1e-12 * amp.values().cwiseAbs().maxCoeff());
}

TEST(Flux, SinglePhotonLimit) {
  const auto limit = photon_flux_limit(105.0, 1064.0);
  EXPECT_NEAR(limit.flux_per_s, 2.78e13, 0.01e13);
  EXPECT_NEAR(limit.power_W, 5.19e-6, 0.01e-6);
  EXPECT_NEAR(spectral_mode_density(limit.power_W, limit), 1.0, 1e-12);
  EXPECT_THROW(photon_flux_limit(0.0, 1064.0), DomainError);
}

TEST(CwLimit, PsfObservablesInsensitiveToPumpWidth) {
  // K and E change by < 1% for pump widths between Δω_PSF/100 and Δω_PSF/10
  const auto g = SpectralGrid::symmetric(1025, 0.35);
  auto report_for = [&](double fraction) {
    BuildOptions options;
    options.min_pump_cells = 0.01;
    const auto amp = build_joint_amplitude(g, PumpSpec{fraction * default_psf, 532.0}, spdc_crystal(),
                                           sfg_crystal(), options);
    return schmidt_decompose(apply_psf(amp, default_psf)).report;
  };
  const auto narrow = report_for(0.01);
  const auto wide = report_for(0.1);
  EXPECT_LT(std::abs(wide.schmidt_number / narrow.schmidt_number - 1.0), 0.01);
  EXPECT_LT(std::abs(wide.entropy / narrow.entropy - 1.0), 0.01);
}
