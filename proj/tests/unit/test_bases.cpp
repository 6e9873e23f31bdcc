#include <cmath>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "qshaper/bases.hpp"
#include "qshaper/entanglement.hpp"

using namespace qshaper;
using namespace qshaper::testing;

namespace {
const SpectralGrid grid = SpectralGrid::symmetric(513, 0.35);
}

TEST(FrequencyBins, Orthonormal) {
  const auto b = frequency_bins({-0.05, 0.0, 0.05}, {0.04, 0.04, 0.04}, grid);
  EXPECT_EQ(b.dimension(), 3);
  EXPECT_EQ(b.kind, BasisKind::frequency_bin);
  EXPECT_LT(orthonormality_defect(b), 1e-12);
  EXPECT_LT((b.gram - Eigen::MatrixXcd::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FrequencyBins, SupportAndHeight) {
  const auto b = frequency_bins({0.1}, {0.04}, grid);
  for (int k = 0; k < grid.size(); ++k) {
    const bool inside = std::abs(grid.omega(k) - 0.1) < 0.02;
    EXPECT_EQ(std::abs(b.functions(k, 0)) > 0.0, inside) << k;
  }
  // closed-form height 1/√Δω before the grid renormalization
  EXPECT_NEAR(b.raw_norms[0], 1.0, 0.1);
}

TEST(FrequencyBins, OverlapRejected) {
  EXPECT_THROW(frequency_bins({0.0, 0.03}, {0.04, 0.04}, grid), BasisError);
  EXPECT_THROW(frequency_bins({0.0, 0.04}, {0.04, 0.04}, grid), BasisError);  // touching
  EXPECT_THROW(frequency_bins({}, {}, grid), BasisError);
  EXPECT_THROW(frequency_bins({0.0}, {0.04, 0.04}, grid), BasisError);
}

TEST(FrequencyBins, TooNarrowForGrid) {
  EXPECT_THROW(frequency_bins({0.0}, {grid.spacing()}, grid), ResolutionError);
  EXPECT_THROW(frequency_bins({0.0}, {0.0}, grid), BasisError);
}

TEST(FrequencyBins, MirroredPartner) {
  const auto b = frequency_bins({0.03, 0.08}, {0.04, 0.04}, grid);
  const auto m = mirrored(b);
  EXPECT_DOUBLE_EQ(m.centers[0], -0.03);
  EXPECT_DOUBLE_EQ(m.centers[1], -0.08);
  const int n = grid.size();
  for (int k = 0; k < n; ++k) EXPECT_EQ(m.functions(k, 1), b.functions(n - 1 - k, 1));
  EXPECT_LT(orthonormality_defect(m), 1e-12);
}

TEST(TimeBins, GramMatchesDirichletKernel) {
  // zero-width bins are bare phasors on the grid: ⟨f_0|f_1⟩ is the discrete
  // Dirichlet kernel sin(nhΔt/2)/(n sin(hΔt/2)) -> sinc(WΔt/2)
  const int n = grid.size();
  const double h = grid.spacing();
  for (double t1 : {10.0, 25.0, 50.0, 200.0}) {
    const auto b = time_bins({0.0, t1}, {0.0, 0.0}, grid);
    const cdouble g01 = b.gram(0, 1);
    const double dirichlet = std::sin(n * h * t1 / 2) / (n * std::sin(h * t1 / 2));
    EXPECT_NEAR(g01.real(), dirichlet, 1e-12) << t1;
    EXPECT_NEAR(g01.imag(), 0.0, 1e-12) << t1;
    EXPECT_NEAR(g01.real(), sinc(n * h * t1 / 2), 2e-3) << t1;
    EXPECT_NEAR(b.gram(0, 0).real(), 1.0, 1e-12);
  }
}

TEST(TimeBins, FiniteWidthEnvelope) {
  const auto b = time_bins({0.0, 400.0}, {100.0, 100.0}, grid);
  // sinc(ωΔt/2) envelope: first zero at ω = 2π/Δt
  const double w0 = units::two_pi / 100.0;
  const int k = static_cast<int>(std::lround((w0 - grid.omega_min()) / grid.spacing()));
  EXPECT_LT(std::abs(b.functions(k, 0)) / std::abs(b.functions(grid.center_index(), 0)), 0.02);
  EXPECT_GT(b.raw_norms[0], 0.0);
  EXPECT_THROW(time_bins({0.0, 50.0}, {100.0, 100.0}, grid), BasisError);
}

TEST(TimeBins, PhaseEncodesDelay) {
  const auto b = time_bins({0.0, 30.0}, {0.0, 0.0}, grid);
  const int c = grid.center_index();
  const cdouble ratio = b.functions(c + 10, 1) / b.functions(c + 10, 0);
  EXPECT_NEAR(std::arg(ratio), std::remainder(-grid.omega(c + 10) * 30.0, units::two_pi), 1e-12);
}

TEST(SchmidtModes, OrthonormalAndReconstructing) {
  const auto amp = gamma_psf_amplitude(257);
  const int d = 4;
  const auto pair = schmidt_mode_pair(amp, d);
  EXPECT_LT(orthonormality_defect(pair.idler), 1e-10);
  EXPECT_LT(orthonormality_defect(pair.signal), 1e-10);
  const auto dec = decompose_schmidt(amp, -1);
  Eigen::MatrixXcd rebuilt = Eigen::MatrixXcd::Zero(257, 257);
  for (int j = 0; j < 257; ++j)
    rebuilt += std::sqrt(dec.weights[j]) * dec.idler_modes.col(j) * dec.signal_modes.col(j).transpose();
  // weights come from ρ's eigenvalues, so √β of the tail carries ~√ε absolute error
  EXPECT_LT((rebuilt - amp.values()).cwiseAbs().maxCoeff(), 1e-6 * amp.values().cwiseAbs().maxCoeff());
}

TEST(SchmidtModes, SignConventionLargestSampleRealPositive) {
  const auto amp = gamma_psf_amplitude(257);
  const auto b = schmidt_modes(amp, 5);
  for (int j = 0; j < 5; ++j) {
    Eigen::Index k;
    b.functions.col(j).cwiseAbs().maxCoeff(&k);
    EXPECT_GT(b.functions(k, j).real(), 0.0);
    EXPECT_EQ(b.functions(k, j).imag(), 0.0);
  }
}

TEST(SchmidtModes, WeightsDescendAndMatchDoubleGaussian) {
  const auto g = SpectralGrid::symmetric(301, 0.35);
  const double a = 0.01, b = 0.05;
  const auto basis = schmidt_modes(double_gaussian_amplitude(g, a, b), 6);
  const auto oracle = double_gaussian_weights(a, b, 6);
  for (int j = 0; j < 6; ++j) EXPECT_NEAR(basis.weights[j], oracle[j], 1e-6) << j;
}

TEST(SchmidtModes, RankErrorOnSeparableAmplitude) {
  const auto g = SpectralGrid::symmetric(101, 0.35);
  Eigen::MatrixXcd v(101, 101);
  for (int j = 0; j < 101; ++j)
    for (int i = 0; i < 101; ++i) v(i, j) = std::exp(-g.omega(i) * g.omega(i) / 0.002 - g.omega(j) * g.omega(j) / 0.003);
  const JointAmplitude amp(g, v, AmplitudeKind::lambda);
  EXPECT_NO_THROW(schmidt_modes(amp, 1));
  EXPECT_THROW(schmidt_modes(amp, 2), RankError);
  EXPECT_THROW(schmidt_modes(amp, 0), BasisError);
}

TEST(SchmidtModes, ComplexAmplitudePath) {
  // a phase chirp makes Γ complex: the general ρ = AA† route is used
  const auto g = SpectralGrid::symmetric(201, 0.35);
  const auto real_amp = double_gaussian_amplitude(g, 0.02, 0.06);
  Eigen::MatrixXcd v = real_amp.values();
  for (int j = 0; j < 201; ++j)
    for (int i = 0; i < 201; ++i) v(i, j) *= std::polar(1.0, 30.0 * g.omega(i) * g.omega(i) - 5.0 * g.omega(j));
  const JointAmplitude amp(g, v, AmplitudeKind::lambda);
  ASSERT_FALSE(amp.is_real());
  const auto pair = schmidt_mode_pair(amp, 3);
  EXPECT_LT(orthonormality_defect(pair.idler), 1e-10);
  EXPECT_LT(orthonormality_defect(pair.signal), 1e-10);
  // local phases do not change the spectrum
  const auto oracle = double_gaussian_weights(0.02, 0.06, 3);
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(pair.idler.weights[j], oracle[j], 1e-6);
}
