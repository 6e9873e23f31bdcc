#pragma once
// Entanglement quantifiers: Schmidt spectrum, entropy, Schmidt number, the
// CGLMP thresholds and Bell parameter, and the fringe-model fits.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qshaper/error.hpp"
#include "qshaper/fit.hpp"
#include "qshaper/measurement.hpp"
#include "qshaper/schmidt.hpp"
#include "qshaper/spectral_field.hpp"

namespace qshaper {

struct EntanglementReport {
  Eigen::VectorXd weights;  ///< β_j, descending
  double entropy = 0.0;     ///< E [ebits]
  double schmidt_number = 1.0;
  double effective_dimension = 1.0;  ///< 2^E
  int rank = 0;                      ///< number of β_j above the entropy floor
};

inline constexpr double entropy_floor = 1e-15;

inline EntanglementReport entanglement_report(const Eigen::VectorXd& weights) {
  EntanglementReport report;
  report.weights = weights;
  double purity = 0.0;
  for (Eigen::Index j = 0; j < weights.size(); ++j) {
    const double b = weights[j];
    purity += b * b;
    if (b > entropy_floor) {
      report.entropy -= b * std::log2(b);
      ++report.rank;
    }
  }
  if (!(purity > 0.0)) throw DomainError("entanglement_report: empty spectrum");
  report.schmidt_number = 1.0 / purity;
  report.effective_dimension = std::exp2(report.entropy);
  return report;
}

struct SchmidtAnalysis {
  EntanglementReport report;
  SchmidtDecomposition modes;
};

/// keep_modes as in decompose_schmidt (0: spectrum only, < 0: every mode).
inline SchmidtAnalysis schmidt_decompose(const JointAmplitude& amp, int keep_modes = 0) {
  auto modes = decompose_schmidt(amp, keep_modes);
  auto report = entanglement_report(modes.weights);
  return {std::move(report), std::move(modes)};
}

/// exp(−(ω_i+ω_s)²/4a² − (ω_i−ω_s)²/4b²)
inline JointAmplitude double_gaussian_amplitude(const SpectralGrid& grid, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("double_gaussian_amplitude: widths must be positive");
  const int n = grid.size();
  Eigen::MatrixXcd values(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const double sum = grid.omega(i) + grid.omega(j);
      const double diff = grid.omega(i) - grid.omega(j);
      values(i, j) = std::exp(-sum * sum / (4 * a * a) - diff * diff / (4 * b * b));
    }
  return JointAmplitude(grid, std::move(values), AmplitudeKind::lambda);
}

/// Closed-form Schmidt number of the double Gaussian: K = (a/b + b/a)/2.
inline double double_gaussian_oracle(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("double_gaussian_oracle: widths must be positive");
  return 0.5 * (a / b + b / a);
}

/// β_n = (1 − μ²)μ^{2n}, μ = |a − b|/(a + b).
inline Eigen::VectorXd double_gaussian_weights(double a, double b, int count) {
  const double mu = std::abs(a - b) / (a + b);
  Eigen::VectorXd beta(count);
  for (int k = 0; k < count; ++k) beta[k] = (1.0 - mu * mu) * std::pow(mu, 2.0 * k);
  return beta;
}

// ---------------------------------------------------------------------------
// CGLMP

struct CglmpThresholds {
  int d = 0;
  double max_value = 0.0;        ///< I_d^max
  double critical_lambda = 0.0;  ///< λ_c = 2/I_d^max
  double critical_visibility = 0.0;
};

/// V = dλ/(2 + λ(d−2))
inline double visibility_from_lambda(double lambda, int d) {
  if (d < 2) throw DomainError("visibility_from_lambda: d must be >= 2");
  return d * lambda / (2.0 + lambda * (d - 2));
}

inline double lambda_from_visibility(double visibility, int d) {
  if (d < 2) throw DomainError("lambda_from_visibility: d must be >= 2");
  return 2.0 * visibility / (d - visibility * (d - 2));
}

inline CglmpThresholds cglmp_thresholds(int d) {
  static constexpr std::array<double, 3> max_values{2.8284271247461903, 2.8729, 2.8962};
  if (d < 2 || d > 4) throw DomainError("cglmp_thresholds: d must be 2, 3 or 4");
  CglmpThresholds t;
  t.d = d;
  t.max_value = max_values[d - 2];
  t.critical_lambda = 2.0 / t.max_value;
  t.critical_visibility = visibility_from_lambda(t.critical_lambda, d);
  return t;
}

/// P(a, b | A_x, B_y) for outcomes a, b ∈ [0, d) and settings x, y ∈ {0, 1}.
using JointProbability = std::function<double(int x, int y, int a, int b)>;

/// I_d = Σ_k (1 − 2k/(d−1)) {P(A1=B1+k) + P(B1=A2+k+1) + P(A2=B2+k) + P(B2=A1+k)
///                          − P(A1=B1−k−1) − P(B1=A2−k) − P(A2=B2−k−1) − P(B2=A1−k−1)}
inline double cglmp_value(int d, const JointProbability& p) {
  auto wrap = [d](int v) { return ((v % d) + d) % d; };
  // P(A_x = B_y + shift)
  auto a_eq_b = [&](int x, int y, int shift) {
    double total = 0.0;
    for (int b = 0; b < d; ++b) total += p(x, y, wrap(b + shift), b);
    return total;
  };
  // P(B_y = A_x + shift)
  auto b_eq_a = [&](int x, int y, int shift) {
    double total = 0.0;
    for (int a = 0; a < d; ++a) total += p(x, y, a, wrap(a + shift));
    return total;
  };
  double value = 0.0;
  for (int k = 0; k <= d / 2 - 1; ++k) {
    const double w = 1.0 - 2.0 * k / (d - 1);
    value += w * (a_eq_b(0, 0, k) + b_eq_a(1, 0, k + 1) + a_eq_b(1, 1, k) + b_eq_a(0, 1, k) -
                  a_eq_b(0, 0, -k - 1) - b_eq_a(1, 0, -k) - a_eq_b(1, 1, -k - 1) - b_eq_a(0, 1, -k - 1));
  }
  return value;
}

/// Analyzer phases of the two measurement settings per photon.
struct BellSettings {
  std::array<double, 2> idler{0.0, units::pi / 2.0};
  std::array<double, 2> signal{-units::pi / 4.0, units::pi / 4.0};
};

struct BellResult {
  int d = 2;
  double value = 0.0;  ///< I_d
  BellSettings settings;
  CglmpThresholds thresholds;
  bool violates() const { return value > 2.0; }
};

/// I_d of a d×d state measured with the phase analyzers
/// u_j = e^{ij(θ + 2πa/d)}/√d on the idler and the conjugate e^{−ij(θ + 2πb/d)}/√d
/// on the signal, so outcomes correlate in a − b. On the shaper this is a
/// sign flip of the signal phase. Probabilities are normalized per setting pair.
inline BellResult cglmp_bell(const QuditState& state, const BellSettings& settings = {}) {
  const int d = state.dimension();
  auto analyzer = [d](double theta, int outcome, double sign) {
    Eigen::VectorXcd u(d);
    for (int j = 0; j < d; ++j)
      u[j] = std::polar(1.0 / std::sqrt(d), sign * j * (theta + units::two_pi * outcome / d));
    return u;
  };
  std::vector<double> table(4 * d * d);
  auto at = [d](int x, int y, int a, int b) { return ((x * 2 + y) * d + a) * d + b; };
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      double total = 0.0;
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
          const double pr = projection_probability(state, analyzer(settings.idler[x], a, 1.0),
                                                   analyzer(settings.signal[y], b, -1.0));
          table[at(x, y, a, b)] = pr;
          total += pr;
        }
      if (!(total > 0.0)) throw DomainError("cglmp_bell: setting pair with vanishing signal");
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) table[at(x, y, a, b)] /= total;
    }
  BellResult result;
  result.d = d;
  result.settings = settings;
  result.value = cglmp_value(d, [&](int x, int y, int a, int b) { return table[at(x, y, a, b)]; });
  if (d >= 2 && d <= 4) result.thresholds = cglmp_thresholds(d);
  return result;
}

/// Time-bin qubit c ∝ [[1, γ₁], [γ₁, γ₂]]: the single projection signal is
/// |1 + γ₁(e^{iφ_i} + e^{iφ_s}) + γ₂e^{i(φ_i+φ_s)}|².
inline QuditState time_bin_state(double gamma1, double gamma2) {
  if (!(gamma1 >= 0.0) || !(gamma2 >= 0.0)) throw DomainError("time_bin_state: γ must be non-negative");
  Eigen::MatrixXcd c(2, 2);
  c << 1.0, gamma1, gamma1, gamma2;
  c /= c.norm();
  return QuditState::from_coefficients(std::move(c), BasisKind::time_bin);
}

inline BellResult bell_I2(double gamma1, double gamma2, const BellSettings& settings = {}) {
  return cglmp_bell(time_bin_state(gamma1, gamma2), settings);
}

// ---------------------------------------------------------------------------
// Fringe models

enum class FringeModel { qubit, qutrit, ququart, cos4, gamma };

inline const char* to_string(FringeModel model) {
  switch (model) {
    case FringeModel::qubit: return "qubit";
    case FringeModel::qutrit: return "qutrit";
    case FringeModel::ququart: return "ququart";
    case FringeModel::cos4: return "cos4";
    case FringeModel::gamma: return "gamma";
  }
  return "?";
}

inline FringeModel fringe_model_for(int d) {
  switch (d) {
    case 2: return FringeModel::qubit;
    case 3: return FringeModel::qutrit;
    case 4: return FringeModel::ququart;
    default: throw DomainError("fringe model defined for d = 2, 3, 4 only");
  }
}

inline int model_dimension(FringeModel model) {
  switch (model) {
    case FringeModel::qutrit: return 3;
    case FringeModel::ququart: return 4;
    default: return 2;
  }
}

/// s·[d + 2λ Σ_{k=1}^{d−1} (d−k) cos(k(2φ+φ₀))]/d
inline double lambda_fringe(double phi, int d, double scale, double lambda, double phi0) {
  double harmonics = 0.0;
  for (int k = 1; k < d; ++k) harmonics += (d - k) * std::cos(k * (2.0 * phi + phi0));
  return scale * (d + 2.0 * lambda * harmonics) / d;
}

/// s·cos⁴((φ + φ₀/2)/2)
inline double cos4_fringe(double phi, double scale, double phi0) {
  return scale * std::pow(std::cos((phi + phi0 / 2.0) / 2.0), 4);
}

/// s·|1 + 2γ₁e^{iθ} + γ₂e^{2iθ}|², θ = φ + φ₀/2
inline double gamma_fringe(double phi, double scale, double gamma1, double gamma2, double phi0) {
  const cdouble z = std::polar(1.0, phi + phi0 / 2.0);
  return scale * std::norm(1.0 + 2.0 * gamma1 * z + gamma2 * z * z);
}

struct FitResult {
  FringeModel model = FringeModel::qubit;
  std::vector<std::string> names;
  Eigen::VectorXd parameters;
  Eigen::VectorXd uncertainties;  ///< 1σ
  double residual_norm = 0.0;     ///< ‖model − data‖₂ (unweighted)
  double chi2 = 0.0;              ///< Σ r² of the (weighted) objective
  int iterations = 0;
  bool weighted = false;

  double parameter(const std::string& name) const {
    for (std::size_t k = 0; k < names.size(); ++k)
      if (names[k] == name) return parameters[static_cast<Eigen::Index>(k)];
    throw DomainError("FitResult: no parameter '" + name + "'");
  }
  double uncertainty(const std::string& name) const {
    for (std::size_t k = 0; k < names.size(); ++k)
      if (names[k] == name) return uncertainties[static_cast<Eigen::Index>(k)];
    throw DomainError("FitResult: no parameter '" + name + "'");
  }
  /// λ_d for the λ models.
  double lambda() const { return parameter("lambda"); }
  double visibility() const { return visibility_from_lambda(lambda(), model_dimension(model)); }
  double evaluate(double phi) const;
};

inline double FitResult::evaluate(double phi) const {
  const auto& p = parameters;
  switch (model) {
    case FringeModel::cos4: return cos4_fringe(phi, p[0], p[1]);
    case FringeModel::gamma: return gamma_fringe(phi, p[0], p[1], p[2], p[3]);
    default: return lambda_fringe(phi, model_dimension(model), p[0], p[1], p[2]);
  }
}

/// Fit input: phases, values, optional per-point σ.
struct FitData {
  std::vector<double> phi;
  std::vector<double> y;
  std::vector<double> sigma;  ///< empty: unweighted

  static FitData from(const FringeScan& scan) {
    scan.validate();
    return {scan.phi, scan.signal, {}};
  }
  /// Background-subtracted net counts with Poisson errors.
  static FitData from(const CountRecord& record) {
    FitData data{record.phi, {}, {}};
    for (std::size_t k = 0; k < record.size(); ++k) {
      data.y.push_back(record.net(k));
      data.sigma.push_back(std::sqrt(std::max(record.variance(k), 1.0)));
    }
    return data;
  }
  bool weighted() const { return !sigma.empty(); }
  std::size_t size() const { return phi.size(); }
};

namespace detail {

inline double wrap_phase(double x) {
  double w = std::remainder(x, units::two_pi);
  return w <= -units::pi ? w + units::two_pi : w;
}

inline std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

inline double mean(const std::vector<double>& v) {
  double total = 0.0;
  for (double x : v) total += x;
  return total / static_cast<double>(v.size());
}

// Model values and ∂/∂p for one phase.
using ModelFn = std::function<double(double phi, const Eigen::VectorXd& p, Eigen::Ref<Eigen::VectorXd> grad)>;

inline FitResult run_fit(FringeModel model, std::vector<std::string> names, const ModelFn& f, const FitData& data,
                         const std::vector<Eigen::VectorXd>& starts, const Eigen::VectorXd& lower,
                         const Eigen::VectorXd& upper) {
  const auto n = static_cast<Eigen::Index>(data.size());
  const auto np = static_cast<Eigen::Index>(names.size());
  if (data.y.size() != data.size() || (data.weighted() && data.sigma.size() != data.size()))
    throw FitError("fit: inconsistent data lengths");
  if (n < 2 * np)
    throw FitError("fit: need at least " + std::to_string(2 * np) + " points, got " + std::to_string(n));

  auto weight = [&](Eigen::Index k) { return data.weighted() ? 1.0 / data.sigma[k] : 1.0; };
  LeastSquaresProblem problem;
  problem.lower = lower;
  problem.upper = upper;
  problem.residuals = [&](const Eigen::VectorXd& p) {
    Eigen::VectorXd r(n), g(np);
    for (Eigen::Index k = 0; k < n; ++k) r[k] = (f(data.phi[k], p, g) - data.y[k]) * weight(k);
    return r;
  };
  problem.jacobian = [&](const Eigen::VectorXd& p) {
    Eigen::MatrixXd J(n, np);
    Eigen::VectorXd g(np);
    for (Eigen::Index k = 0; k < n; ++k) {
      f(data.phi[k], p, g);
      J.row(k) = g.transpose() * weight(k);
    }
    return J;
  };

  std::optional<LeastSquaresSolution> best;
  std::string failures;
  for (const auto& start : starts) {
    try {
      auto solution = levenberg_marquardt(problem, start);
      if (!best || solution.cost < best->cost) best = std::move(solution);
    } catch (const FitError& e) {
      failures += std::string(e.what()) + "; ";
    }
  }
  if (!best) throw FitError(std::string("fit (") + to_string(model) + "): " + failures);

  FitResult result;
  result.model = model;
  result.names = std::move(names);
  result.parameters = best->parameters;
  result.chi2 = best->cost;
  result.iterations = best->iterations;
  result.weighted = data.weighted();
  Eigen::MatrixXd covariance = pseudo_inverse(best->normal_matrix);
  if (!data.weighted()) covariance *= best->cost / static_cast<double>(std::max<Eigen::Index>(n - np, 1));
  result.uncertainties = covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
  double rss = 0.0;
  Eigen::VectorXd g(np);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double diff = f(data.phi[k], result.parameters, g) - data.y[k];
    rss += diff * diff;
  }
  result.residual_norm = std::sqrt(rss);
  return result;
}

inline double classical_visibility(const std::vector<double>& y) {
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  const double denom = *hi + *lo;
  return denom > 0.0 ? std::clamp((*hi - *lo) / denom, 0.0, 1.0) : 0.0;
}

}  // namespace detail

/// λ_d noise-model fringe fit over (scale, λ, φ₀).
inline FitResult fit_fringe(const FitData& data, int d) {
  const FringeModel model = fringe_model_for(d);
  const double inf = std::numeric_limits<double>::infinity();
  detail::ModelFn f = [d](double phi, const Eigen::VectorXd& p, Eigen::Ref<Eigen::VectorXd> g) {
    const double x = 2.0 * phi + p[2];
    double c = 0.0, s = 0.0;
    for (int k = 1; k < d; ++k) {
      c += (d - k) * std::cos(k * x);
      s += (d - k) * k * std::sin(k * x);
    }
    const double shape = (d + 2.0 * p[1] * c) / d;
    g[0] = shape;
    g[1] = p[0] * 2.0 * c / d;
    g[2] = -p[0] * 2.0 * p[1] * s / d;
    return p[0] * shape;
  };
  const double lambda0 = std::clamp(lambda_from_visibility(detail::classical_visibility(data.y), d), 0.0, 1.0);
  const double phi0 = detail::wrap_phase(-2.0 * data.phi[detail::argmax(data.y)]);
  Eigen::VectorXd start(3), lower(3), upper(3);
  start << detail::mean(data.y), lambda0, phi0;
  lower << 0.0, 0.0, -inf;
  upper << inf, 1.0, inf;
  auto result = detail::run_fit(model, {"scale", "lambda", "phi0"}, f, data, {start}, lower, upper);
  result.parameters[2] = detail::wrap_phase(result.parameters[2]);
  return result;
}

inline FitResult fit_fringe(const FringeScan& scan, int d) { return fit_fringe(FitData::from(scan), d); }
inline FitResult fit_fringe(const CountRecord& record, int d) { return fit_fringe(FitData::from(record), d); }

/// Product of two single-photon interference rates, s·cos⁴((φ+φ₀/2)/2).
inline FitResult fit_cos4(const FitData& data) {
  const double inf = std::numeric_limits<double>::infinity();
  detail::ModelFn f = [](double phi, const Eigen::VectorXd& p, Eigen::Ref<Eigen::VectorXd> g) {
    const double a = (phi + p[1] / 2.0) / 2.0;
    const double c = std::cos(a);
    const double c4 = c * c * c * c;
    g[0] = c4;
    g[1] = -p[0] * c * c * c * std::sin(a);  // 4c³·(−sin a)·¼
    return p[0] * c4;
  };
  // maximum where φ + φ₀/2 = 0; φ₀ has period 4π
  const double phi0 = std::remainder(-2.0 * data.phi[detail::argmax(data.y)], 2.0 * units::two_pi);
  Eigen::VectorXd start(2), lower(2), upper(2);
  start << *std::max_element(data.y.begin(), data.y.end()), phi0;
  lower << 0.0, -inf;
  upper << inf, inf;
  return detail::run_fit(FringeModel::cos4, {"scale", "phi0"}, f, data, {start}, lower, upper);
}

inline FitResult fit_cos4(const FringeScan& scan) { return fit_cos4(FitData::from(scan)); }

/// s·|1 + 2γ₁e^{iθ} + γ₂e^{2iθ}|², θ = φ + φ₀/2, γ₁ ≥ 0, 0 ≤ γ₂ ≤ 1. The
/// bound on γ₂ removes the exact degeneracy (s, γ₁, γ₂) ~ (sγ₂², γ₁/γ₂, 1/γ₂).
inline FitResult fit_gamma(const FitData& data) {
  const double inf = std::numeric_limits<double>::infinity();
  detail::ModelFn f = [](double phi, const Eigen::VectorXd& p, Eigen::Ref<Eigen::VectorXd> g) {
    const cdouble z = std::polar(1.0, phi + p[3] / 2.0);
    const cdouble q = 1.0 + 2.0 * p[1] * z + p[2] * z * z;
    const double value = std::norm(q);
    const cdouble iz = cdouble(0.0, 1.0) * z;
    // ∂|q|²/∂x = 2 Re(q̄ ∂q/∂x)
    g[0] = value;
    g[1] = p[0] * 2.0 * std::real(std::conj(q) * 2.0 * z);
    g[2] = p[0] * 2.0 * std::real(std::conj(q) * z * z);
    g[3] = p[0] * 2.0 * std::real(std::conj(q) * (p[1] * iz + p[2] * iz * z));
    return p[0] * value;
  };
  // Deterministic multi-start: the stated (0.5, 0.5) first, then a coarse
  // grid, each with both φ₀ branches (φ₀ has period 4π).
  const double phi_max = data.phi[detail::argmax(data.y)];
  const double y_max = *std::max_element(data.y.begin(), data.y.end());
  std::vector<Eigen::VectorXd> starts;
  for (const auto& [g1, g2] : {std::pair{0.5, 0.5}, {0.1, 0.1}, {0.1, 1.0}, {1.0, 0.1}, {1.0, 1.0}, {0.5, 1.0},
                               {2.0, 1.0}})
    for (double phi0 : {-2.0 * phi_max, -2.0 * phi_max + units::two_pi}) {
      Eigen::VectorXd start(4);
      start << y_max / std::pow(1.0 + 2.0 * g1 + g2, 2), g1, g2, phi0;
      starts.push_back(start);
    }
  Eigen::VectorXd lower(4), upper(4);
  lower << 0.0, 0.0, 0.0, -inf;
  upper << inf, inf, 1.0, inf;
  auto result = detail::run_fit(FringeModel::gamma, {"scale", "gamma1", "gamma2", "phi0"}, f, data, starts,
                                lower, upper);
  result.parameters[3] = std::remainder(result.parameters[3], 2.0 * units::two_pi);
  return result;
}

inline FitResult fit_gamma(const FringeScan& scan) { return fit_gamma(FitData::from(scan)); }

}  // namespace qshaper
