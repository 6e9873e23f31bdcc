#include <cmath>
#include <memory>
#include <numeric>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "qshaper/entanglement.hpp"
#include "qshaper/measurement.hpp"

using namespace qshaper;
using namespace qshaper::testing;

TEST(Coincidence, UnityTransferIntegratesAmplitude) {
  const auto amp = gamma_amplitude(257);
  const auto one = TransferFunction::unity(amp.grid());
  const double h = amp.grid().spacing();
  const double expected = std::norm(amp.values().sum() * h * h);
  EXPECT_NEAR(coincidence_signal(amp, one, one), expected, 1e-14 * expected);
  EXPECT_NEAR(coincidence_signal(amp, combined_modulation(one, one)), expected, 1e-14 * expected);
}

TEST(Coincidence, GridMismatch) {
  const auto amp = gamma_amplitude(257);
  const auto other = TransferFunction::unity(SpectralGrid::symmetric(129, 0.35));
  EXPECT_THROW(coincidence_signal(amp, other, other), GridError);
}

TEST(ProjectState, SchmidtBasisIsDiagonal) {
  const auto amp = gamma_psf_amplitude(257);
  const auto pair = schmidt_mode_pair(amp, 4);
  const auto state = project_state(amp, pair.idler, pair.signal);
  for (int j = 0; j < 4; ++j)
    for (int k = 0; k < 4; ++k) {
      if (j == k)
        EXPECT_NEAR(std::abs(state.coefficients(j, j)), std::sqrt(pair.idler.weights[j]), 1e-12);
      else
        EXPECT_LT(std::abs(state.coefficients(j, k)), 1e-12);
    }
  const double captured = pair.idler.weights[0] + pair.idler.weights[1] + pair.idler.weights[2] +
                          pair.idler.weights[3];
  EXPECT_NEAR(state.truncation(), 1.0 - captured, 1e-12);
  EXPECT_EQ(state.idler_kind, BasisKind::schmidt);
}

TEST(ProjectState, DimensionMismatch) {
  const auto amp = gamma_amplitude(257);
  const auto b2 = frequency_bins({-0.05, 0.05}, {0.04, 0.04}, amp.grid());
  const auto b3 = frequency_bins({-0.05, 0.0, 0.05}, {0.04, 0.04, 0.04}, amp.grid());
  EXPECT_THROW(project_state(amp, b2, b3), GridError);
}

TEST(ProjectionProbability, Guards) {
  const auto s = QuditState::maximally_entangled(3);
  EXPECT_THROW(projection_probability(s, Eigen::VectorXcd::Ones(2), Eigen::VectorXcd::Ones(3)), GridError);
  EXPECT_THROW(projection_probability(s, Eigen::VectorXcd::Constant(3, 1.1), Eigen::VectorXcd::Ones(3)),
               DomainError);
  EXPECT_THROW(QuditState::from_coefficients(Eigen::MatrixXcd::Ones(2, 3)), GridError);
}

TEST(FringeScan, IdealQubitIsRaisedCosine) {
  const auto phi = phase_grid(32);
  const auto scan = fringe_scan(QuditState::maximally_entangled(2), phi);
  for (std::size_t k = 0; k < phi.size(); ++k) EXPECT_NEAR(scan.signal[k], 1.0 + std::cos(2 * phi[k]), 1e-12);
  EXPECT_NEAR(scan.mean, 1.0, 1e-12);
  EXPECT_EQ(scan.route, ScanRoute::state_space);
}

TEST(FringeScan, PhaseGridAndCoverage) {
  const auto phi = phase_grid(8, units::pi, 1.0);
  EXPECT_DOUBLE_EQ(phi.front(), 1.0);
  EXPECT_NEAR(phi[4] - phi[0], units::pi / 2, 1e-15);
  EXPECT_THROW(phase_grid(0), GridError);
  const auto s = QuditState::maximally_entangled(2);
  EXPECT_THROW(fringe_scan(s, {0.0, 0.1, 0.2}), GridError);
  EXPECT_THROW(fringe_scan(s, phase_grid(16), {1.0, 1.0, 1.0}), GridError);
}

TEST(FringeScan, VanishingSignalRejected) {
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(2, 2);
  const auto s = QuditState::from_coefficients(c);
  EXPECT_THROW(fringe_scan(s, phase_grid(16)), DomainError);
}

TEST(FringeScan, DualRoutesAgreeForFrequencyBins) {
  const auto amp = gamma_psf_amplitude(513);
  for (int d : {2, 3}) {
    std::vector<double> centers, widths;
    for (int j = 0; j < d; ++j) {
      centers.push_back((j - 0.5 * (d - 1)) * 0.05);
      widths.push_back(0.04);
    }
    auto idler = std::make_shared<const BasisSet>(frequency_bins(centers, widths, amp.grid()));
    auto signal = std::make_shared<const BasisSet>(mirrored(*idler));
    const auto phi = phase_grid(32);
    const auto space = fringe_scan(project_state(amp, *idler, *signal), phi);
    const auto field = fringe_scan(amp, idler, signal, phi);
    EXPECT_EQ(field.route, ScanRoute::full_field);
    EXPECT_GT(field.truncation, 0.0);
    for (std::size_t k = 0; k < phi.size(); ++k)
      EXPECT_NEAR(field.signal[k], space.signal[k], 0.01 * space.signal[k] + 1e-12) << d << " " << k;
  }
}

TEST(FringeScan, TransferPairOverload) {
  const auto amp = gamma_amplitude(257);
  const auto phi = phase_grid(16, units::two_pi);
  auto setting = [&](double p) {
    const auto m = franson_transfer(0.5, 0.5, 0.0, p, amp.grid());
    return TransferPair{m, m};
  };
  const auto scan = fringe_scan(amp, setting, phi, 2, BasisKind::time_bin);
  // zero delay: |(1 + e^{iφ})/2|⁴ ∝ cos⁴(φ/2)
  for (std::size_t k = 0; k < phi.size(); ++k)
    EXPECT_NEAR(scan.signal[k], std::pow(std::cos(phi[k] / 2), 4) / 0.375, 1e-12);
}

TEST(Counts, DeterministicUnderSeed) {
  const auto scan = fringe_scan(QuditState::maximally_entangled(3), phase_grid(32));
  const auto a = synthesize_counts(scan, 20.0, 11.0, 300.0, 42);
  const auto b = synthesize_counts(scan, 20.0, 11.0, 300.0, 42);
  const auto c = synthesize_counts(scan, 20.0, 11.0, 300.0, 43);
  EXPECT_EQ(a.gross, b.gross);
  EXPECT_EQ(a.background, b.background);
  EXPECT_NE(a.gross, c.gross);
  EXPECT_EQ(a.seed, 42u);
}

TEST(Counts, MeansFollowRates) {
  const auto scan = fringe_scan(QuditState::maximally_entangled(2), phase_grid(64));
  const auto r = synthesize_counts(scan, 20.0, 11.0, 1000.0, 7);
  double gross = 0.0, background = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k) {
    gross += r.gross[k];
    background += r.background[k];
  }
  // peak-normalized signal (1 + cos 2φ)/2 averages 1/2
  EXPECT_NEAR(gross / r.size(), (20.0 * 0.5 + 11.0) * 1000.0, 4 * std::sqrt(21000.0 / r.size()));
  EXPECT_NEAR(background / r.size(), 11000.0, 4 * std::sqrt(11000.0 / r.size()));
  EXPECT_DOUBLE_EQ(r.variance(3), static_cast<double>(r.gross[3] + r.background[3]));
}

TEST(Counts, ZeroRatesAndBadInput) {
  const auto scan = fringe_scan(QuditState::maximally_entangled(2), phase_grid(16));
  const auto r = synthesize_counts(scan, 0.0, 0.0, 10.0, 1);
  for (std::size_t k = 0; k < r.size(); ++k) EXPECT_EQ(r.gross[k] + r.background[k], 0);
  EXPECT_THROW(synthesize_counts(scan, -1.0, 0.0, 10.0, 1), DomainError);
}

TEST(Procrustean, EqualizesDiagonalState) {
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(3, 3);
  c.diagonal() << std::sqrt(0.6), std::sqrt(0.3), std::sqrt(0.1);
  const auto state = QuditState::from_coefficients(c);
  std::vector<double> s;
  for (int k = 0; k < 3; ++k) s.push_back(projection_probability(state, unit_vector(3, k), unit_vector(3, k)));
  const auto u = procrustean_amplitudes(s);
  EXPECT_DOUBLE_EQ(u[2], 1.0);
  for (int k = 0; k < 3; ++k) {
    const Eigen::VectorXcd v = u[k] * unit_vector(3, k);
    EXPECT_NEAR(projection_probability(state, v, v), 0.1, 1e-12);
  }
  EXPECT_THROW(procrustean_amplitudes({1.0, 0.0}), DomainError);
  EXPECT_THROW(procrustean_amplitudes({}), DomainError);
}

TEST(SingleProjection, UsesFixedScale) {
  const auto amp = gamma_psf_amplitude(257);
  auto idler = std::make_shared<const BasisSet>(frequency_bins({-0.03, 0.03}, {0.04, 0.04}, amp.grid()));
  auto signal = std::make_shared<const BasisSet>(mirrored(*idler));
  const double full = single_projection_signal(amp, idler, signal, 0, 1.0);
  const double half = single_projection_signal(amp, idler, signal, 0, 0.5);
  EXPECT_NEAR(half, full / 16.0, 1e-14 * full);
}
