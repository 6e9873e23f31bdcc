#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "qshaper/entanglement.hpp"

using namespace qshaper;
using namespace qshaper::testing;

TEST(Report, UniformSpectrum) {
  for (int d : {1, 2, 5, 16}) {
    const auto r = entanglement_report(Eigen::VectorXd::Constant(d, 1.0 / d));
    EXPECT_NEAR(r.entropy, std::log2(d), 1e-12);
    EXPECT_NEAR(r.schmidt_number, d, 1e-9);
    EXPECT_NEAR(r.effective_dimension, d, 1e-9);
    EXPECT_EQ(r.rank, d);
  }
  EXPECT_THROW(entanglement_report(Eigen::VectorXd::Zero(3)), DomainError);
}

TEST(Report, FloorSkipsRoundoffWeights) {
  Eigen::VectorXd w(3);
  w << 1.0, 1e-17, 0.0;
  const auto r = entanglement_report(w);
  EXPECT_EQ(r.rank, 1);
  EXPECT_DOUBLE_EQ(r.entropy, 0.0);
}

TEST(DoubleGaussian, OracleMatchesDecomposition) {
  const auto g = SpectralGrid::symmetric(401, 0.35);
  for (auto [a, b] : {std::pair{0.01, 0.04}, {0.04, 0.01}, {0.02, 0.02}}) {
    const auto r = schmidt_decompose(double_gaussian_amplitude(g, a, b)).report;
    EXPECT_NEAR(r.schmidt_number, double_gaussian_oracle(a, b), 1e-6 * double_gaussian_oracle(a, b));
  }
  EXPECT_DOUBLE_EQ(double_gaussian_oracle(1.0, 1.0), 1.0);
  EXPECT_THROW(double_gaussian_oracle(0.0, 1.0), DomainError);
  // Σβ = 1 and K = 1/Σβ² in closed form
  const auto beta = double_gaussian_weights(0.01, 0.04, 400);
  EXPECT_NEAR(beta.sum(), 1.0, 1e-12);
  EXPECT_NEAR(1.0 / beta.squaredNorm(), double_gaussian_oracle(0.01, 0.04), 1e-9);
}

TEST(Cglmp, ThresholdTable) {
  EXPECT_NEAR(cglmp_thresholds(2).critical_visibility, 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(cglmp_thresholds(3).critical_visibility, 0.775, 5e-4);
  EXPECT_NEAR(cglmp_thresholds(4).critical_visibility, 0.817, 5e-4);
  EXPECT_THROW(cglmp_thresholds(5), DomainError);
  EXPECT_THROW(cglmp_thresholds(1), DomainError);
}

TEST(Cglmp, VisibilityLambdaInverse) {
  for (int d : {2, 3, 4})
    for (double l : {0.0, 0.3, 0.77, 1.0}) {
      EXPECT_NEAR(lambda_from_visibility(visibility_from_lambda(l, d), d), l, 1e-14);
    }
  EXPECT_DOUBLE_EQ(visibility_from_lambda(1.0, 4), 1.0);
  EXPECT_DOUBLE_EQ(visibility_from_lambda(0.5, 2), 0.5);
}

TEST(Cglmp, MaximallyEntangledReachesTabulatedMaximum) {
  // analyzer angles: idler {0, π/d}, signal {−π/2d, π/2d}
  for (int d : {2, 3, 4}) {
    BellSettings s;
    s.idler = {0.0, units::pi / d};
    s.signal = {-units::pi / (2 * d), units::pi / (2 * d)};
    const auto r = cglmp_bell(QuditState::maximally_entangled(d), s);
    EXPECT_NEAR(r.value, cglmp_thresholds(d).max_value, 1e-4) << d;
    EXPECT_TRUE(r.violates());
  }
}

TEST(Cglmp, ProductStateRespectsLocalBound) {
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(2, 2);
  c(0, 0) = 1.0;
  EXPECT_LE(cglmp_bell(QuditState::from_coefficients(c)).value, 2.0 + 1e-12);
}

TEST(Cglmp, NoiseModelScalesLinearly) {
  // I_d(λ) = λ·I_d^max under the white-noise model, so the threshold is 2/I_max
  const int d = 2;
  auto noisy = [&](double lambda) {
    const BellSettings s;
    auto analyzer = [](double theta, int a, double sign) {
      Eigen::VectorXcd u(2);
      for (int j = 0; j < 2; ++j) u[j] = std::polar(1.0 / std::sqrt(2.0), sign * j * (theta + units::pi * a));
      return u;
    };
    const auto psi = QuditState::maximally_entangled(d);
    return cglmp_value(d, [&](int x, int y, int a, int b) {
      const double pure = projection_probability(psi, analyzer(s.idler[x], a, 1.0), analyzer(s.signal[y], b, -1.0));
      return lambda * pure + (1.0 - lambda) / 4.0;
    });
  };
  EXPECT_NEAR(noisy(1.0), 2.0 * std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(noisy(cglmp_thresholds(2).critical_lambda), 2.0, 1e-12);
}

TEST(TimeBinBell, LimitingCases) {
  EXPECT_NEAR(bell_I2(0.0, 1.0).value, 2.0 * std::sqrt(2.0), 1e-9);
  EXPECT_NEAR(bell_I2(1.0, 1.0).value, std::sqrt(2.0), 1e-6);
  EXPECT_THROW(time_bin_state(-0.1, 1.0), DomainError);
  EXPECT_NEAR(time_bin_state(0.3, 0.7).captured_weight(), 1.0, 1e-14);
}

TEST(FringeFit, RecoversLambdaFromExactModel) {
  for (int d : {2, 3, 4})
    for (double lambda : {1.0, 0.8, 0.45}) {
      FitData data;
      for (double phi : phase_grid(64)) {
        data.phi.push_back(phi);
        data.y.push_back(lambda_fringe(phi, d, 3.0, lambda, 0.4));
      }
      const auto fit = fit_fringe(data, d);
      EXPECT_NEAR(fit.lambda(), lambda, 1e-8) << d;
      EXPECT_NEAR(fit.parameter("scale"), 3.0, 1e-8);
      EXPECT_NEAR(fit.parameter("phi0"), 0.4, 1e-8);
      EXPECT_LT(fit.residual_norm, 1e-8);
      EXPECT_EQ(fit.model, fringe_model_for(d));
    }
}

TEST(FringeFit, WeightedCountsGiveFiniteErrors) {
  const auto scan = fringe_scan(QuditState::maximally_entangled(3), phase_grid(64));
  const auto record = synthesize_counts(scan, 20.0, 11.0, 300.0, 5);
  const auto fit = fit_fringe(record, 3);
  EXPECT_TRUE(fit.weighted);
  EXPECT_GT(fit.uncertainty("lambda"), 0.0);
  EXPECT_LT(fit.uncertainty("lambda"), 0.2);
  EXPECT_THROW(fit.parameter("gamma1"), DomainError);
}

TEST(FringeFit, TooFewPoints) {
  FitData data{{0.0, 1.0, 2.0}, {1.0, 0.5, 1.0}, {}};
  EXPECT_THROW(fit_fringe(data, 2), FitError);
  EXPECT_THROW(fit_fringe(data, 5), DomainError);
}

TEST(Cos4Fit, ExactLaw) {
  FitData data;
  for (double phi : phase_grid(64, units::two_pi)) {
    data.phi.push_back(phi);
    data.y.push_back(cos4_fringe(phi, 2.0, 0.6));
  }
  const auto fit = fit_cos4(data);
  EXPECT_LT(fit.residual_norm, 1e-10);
  EXPECT_NEAR(fit.parameter("scale"), 2.0, 1e-9);
}

TEST(GammaFit, RecoversParameters) {
  for (auto [g1, g2] : {std::pair{1.0, 1.0}, {0.5, 0.9}, {0.2, 1.0}, {0.05, 0.8}}) {
    FitData data;
    for (double phi : phase_grid(64, units::two_pi)) {
      data.phi.push_back(phi);
      data.y.push_back(gamma_fringe(phi, 0.7, g1, g2, -0.3));
    }
    const auto fit = fit_gamma(data);
    EXPECT_NEAR(fit.parameter("gamma1"), g1, 1e-7) << g1 << " " << g2;
    EXPECT_NEAR(fit.parameter("gamma2"), g2, 1e-7) << g1 << " " << g2;
    EXPECT_LT(fit.residual_norm, 1e-8);
  }
}

TEST(GammaFit, MatchesTimeBinStateSignal) {
  // |1 + γ₁(e^{iφ_i} + e^{iφ_s}) + γ₂e^{i(φ_i+φ_s)}|² on the diagonal φ_i = φ_s
  const auto state = time_bin_state(0.4, 0.9);
  for (double phi : {0.0, 0.3, 1.7}) {
    const Eigen::VectorXcd u = phase_ladder({1.0, 1.0}, phi);
    const double p = projection_probability(state, u, u);
    const double norm = 1.0 + 2 * 0.16 + 0.81;
    EXPECT_NEAR(p, gamma_fringe(phi, 1.0 / norm, 0.4, 0.9, 0.0), 1e-12);
  }
}

TEST(LevenbergMarquardt, RespectsBounds) {
  LeastSquaresProblem p;
  p.residuals = [](const Eigen::VectorXd& x) { return Eigen::VectorXd::Constant(1, x[0] - 2.0); };
  p.jacobian = [](const Eigen::VectorXd&) { return Eigen::MatrixXd::Ones(1, 1); };
  p.lower = Eigen::VectorXd::Zero(1);
  p.upper = Eigen::VectorXd::Ones(1);
  const auto s = levenberg_marquardt(p, Eigen::VectorXd::Constant(1, 0.5));
  EXPECT_DOUBLE_EQ(s.parameters[0], 1.0);
}
