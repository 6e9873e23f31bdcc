#pragma once
// SFG coincidence detection, projection onto discrete qudit states, fringe
// scans along a uniform phase ladder and Poissonian count synthesis.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qshaper/bases.hpp"
#include "qshaper/error.hpp"
#include "qshaper/shaper.hpp"
#include "qshaper/spectral_field.hpp"

namespace qshaper {

/// |ψ⟩ = Σ c_jk |j⟩_i |k⟩_s on a pair of discretization bases.
struct QuditState {
  Eigen::MatrixXcd coefficients;
  BasisKind idler_kind = BasisKind::frequency_bin;
  BasisKind signal_kind = BasisKind::frequency_bin;
  double idler_gram_defect = 0.0;
  double signal_gram_defect = 0.0;

  int dimension() const { return static_cast<int>(coefficients.rows()); }
  double captured_weight() const { return coefficients.squaredNorm(); }
  /// Amplitude weight outside the d×d subspace, 1 − Σ|c_jk|².
  double truncation() const { return 1.0 - captured_weight(); }
  bool normalized(double tol = 1e-9) const { return std::abs(truncation()) <= tol; }

  static QuditState from_coefficients(Eigen::MatrixXcd c, BasisKind kind = BasisKind::frequency_bin) {
    if (c.rows() != c.cols() || c.rows() < 1) throw GridError("QuditState: coefficients must be d×d");
    return QuditState{std::move(c), kind, kind, 0.0, 0.0};
  }

  /// Σ_j e^{ijφ₀}|j⟩|j⟩/√d.
  static QuditState maximally_entangled(int d, double phi0 = 0.0) {
    Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(d, d);
    for (int j = 0; j < d; ++j) c(j, j) = std::polar(1.0 / std::sqrt(d), j * phi0);
    return from_coefficients(std::move(c));
  }
};

/// |ΣΣ Γ(ω_i,ω_s) M^i(ω_i) M^s(ω_s) Δω²|²
inline double coincidence_signal(const JointAmplitude& amp, const Eigen::VectorXcd& m_i,
                                 const Eigen::VectorXcd& m_s) {
  const int n = amp.grid().size();
  if (m_i.size() != n || m_s.size() != n) throw GridError("coincidence_signal: length mismatch");
  const double h = amp.grid().spacing();
  const cdouble field = (m_i.transpose() * (amp.values() * m_s)).value() * (h * h);
  return std::norm(field);
}

inline double coincidence_signal(const JointAmplitude& amp, const TransferFunction& m_i,
                                 const TransferFunction& m_s) {
  require_same_axis(amp.grid(), m_i.grid(), "coincidence_signal");
  require_same_axis(amp.grid(), m_s.grid(), "coincidence_signal");
  return coincidence_signal(amp, m_i.samples(), m_s.samples());
}

inline double coincidence_signal(const JointAmplitude& amp, const TwoPhotonModulation& m) {
  return coincidence_signal(amp, m.idler(), m.signal());
}

/// c_jk = ∫∫ f^{i*}_j(ω_i) f^{s*}_k(ω_s) Γ(ω_i,ω_s) dω_i dω_s.
/// The bases are not required to be exactly orthonormal (finite-window time
/// bins are not); their Gram defects are carried along.
inline QuditState project_state(const JointAmplitude& amp, const BasisSet& idler, const BasisSet& signal) {
  require_same_axis(amp.grid(), idler.grid, "project_state");
  require_same_axis(amp.grid(), signal.grid, "project_state");
  if (idler.dimension() != signal.dimension())
    throw GridError("project_state: idler and signal bases differ in dimension");
  const double h = amp.grid().spacing();
  Eigen::MatrixXcd c = idler.functions.adjoint() * amp.values() * signal.functions.conjugate() * (h * h);
  return QuditState{std::move(c), idler.kind, signal.kind, orthonormality_defect(idler),
                    orthonormality_defect(signal)};
}

/// |Σ_jk u^i_j u^s_k c_jk|²
inline double projection_probability(const QuditState& state, const Eigen::VectorXcd& u_i,
                                     const Eigen::VectorXcd& u_s) {
  const int d = state.dimension();
  if (u_i.size() != d || u_s.size() != d) throw GridError("projection_probability: dimension mismatch");
  if (u_i.cwiseAbs().maxCoeff() > 1.0 + 1e-12 || u_s.cwiseAbs().maxCoeff() > 1.0 + 1e-12)
    throw DomainError("projection_probability: |u_j| must not exceed 1");
  const cdouble amplitude = (u_i.transpose() * state.coefficients * u_s).value();
  return std::norm(amplitude);
}

/// u_j = a_j e^{ijφ}
inline Eigen::VectorXcd phase_ladder(const std::vector<double>& amplitudes, double phi) {
  Eigen::VectorXcd u(static_cast<Eigen::Index>(amplitudes.size()));
  for (std::size_t j = 0; j < amplitudes.size(); ++j) u[j] = std::polar(amplitudes[j], j * phi);
  return u;
}

inline Eigen::VectorXcd unit_vector(int d, int k) {
  Eigen::VectorXcd u = Eigen::VectorXcd::Zero(d);
  u[k] = 1.0;
  return u;
}

enum class ScanRoute { state_space, full_field };

inline const char* to_string(ScanRoute route) {
  return route == ScanRoute::state_space ? "state_space" : "full_field";
}

struct FringeScan {
  std::vector<double> phi;
  std::vector<double> signal;  ///< unit mean
  ScanRoute route = ScanRoute::state_space;
  int d = 0;
  BasisKind kind = BasisKind::frequency_bin;
  double mean = 0.0;        ///< mean of the raw signal before normalization
  double truncation = 0.0;  ///< 1 − Σ|c_jk|² of the projected state, when known

  std::size_t size() const { return phi.size(); }

  void validate() const {
    if (phi.size() != signal.size()) throw GridError("FringeScan: phase and signal lengths differ");
    for (std::size_t k = 1; k < phi.size(); ++k)
      if (!(phi[k] > phi[k - 1])) throw GridError("FringeScan: phases must be strictly increasing");
    for (double s : signal)
      if (!(s >= 0.0)) throw DomainError("FringeScan: negative or non-finite signal");
  }
};

/// n equally spaced phases on [start, start + span).
inline std::vector<double> phase_grid(int n, double span = units::pi, double start = 0.0) {
  if (n < 1) throw GridError("phase_grid: need at least one point");
  std::vector<double> phi(n);
  for (int k = 0; k < n; ++k) phi[k] = start + span * k / n;
  return phi;
}

namespace detail {

inline void normalize_scan(FringeScan& scan) {
  const double total = std::accumulate(scan.signal.begin(), scan.signal.end(), 0.0);
  scan.mean = scan.signal.empty() ? 0.0 : total / static_cast<double>(scan.signal.size());
  if (!(scan.mean > 0.0)) throw DomainError("fringe_scan: signal vanishes at every phase");
  for (double& s : scan.signal) s /= scan.mean;
  scan.validate();
}

inline void check_phase_coverage(const std::vector<double>& phi) {
  if (phi.size() < 2) throw GridError("fringe_scan: need at least two phases");
  if (phi.back() - phi.front() < units::pi * (1.0 - 2.0 / static_cast<double>(phi.size())) - 1e-12)
    throw GridError("fringe_scan: phase grid must span a full period (π)");
}

inline std::vector<double> unit_amplitudes(int d, const std::vector<double>& amplitudes) {
  if (amplitudes.empty()) return std::vector<double>(d, 1.0);
  if (static_cast<int>(amplitudes.size()) != d)
    throw GridError("fringe_scan: amplitude count differs from d");
  return amplitudes;
}

}  // namespace detail

/// Both photons projected on u_j = a_j e^{ijφ}.
inline FringeScan fringe_scan(const QuditState& state, const std::vector<double>& phi,
                              const std::vector<double>& amplitudes = {}) {
  detail::check_phase_coverage(phi);
  const int d = state.dimension();
  const auto a = detail::unit_amplitudes(d, amplitudes);
  FringeScan scan{phi, std::vector<double>(phi.size()), ScanRoute::state_space, d, state.idler_kind, 0.0,
                  state.truncation()};
  for (std::size_t k = 0; k < phi.size(); ++k) {
    const Eigen::VectorXcd u = phase_ladder(a, phi[k]);
    scan.signal[k] = projection_probability(state, u, u);
  }
  detail::normalize_scan(scan);
  return scan;
}

/// Full-field route: the SLM applies M = Σ_j a_j e^{ijφ} f_j* on each side
/// (fixed per-basis scale) and the SFG detector integrates the whole amplitude.
inline FringeScan fringe_scan(const JointAmplitude& amp, const std::shared_ptr<const BasisSet>& idler,
                              const std::shared_ptr<const BasisSet>& signal, const std::vector<double>& phi,
                              const std::vector<double>& amplitudes = {}) {
  detail::check_phase_coverage(phi);
  const int d = idler->dimension();
  const auto a = detail::unit_amplitudes(d, amplitudes);
  const double scale_i = safe_scale(*idler);
  const double scale_s = safe_scale(*signal);
  const QuditState state = project_state(amp, *idler, *signal);
  FringeScan scan{phi, std::vector<double>(phi.size()), ScanRoute::full_field, d, idler->kind, 0.0,
                  state.truncation()};
  for (std::size_t k = 0; k < phi.size(); ++k) {
    std::vector<double> phases(d);
    for (int j = 0; j < d; ++j) phases[j] = j * phi[k];
    const auto m_i = transfer_from_coefficients({idler, a, phases, Side::idler, scale_i});
    const auto m_s = transfer_from_coefficients({signal, a, phases, Side::signal, scale_s});
    scan.signal[k] = coincidence_signal(amp, m_i, m_s);
  }
  detail::normalize_scan(scan);
  return scan;
}

using TransferPair = std::pair<TransferFunction, TransferFunction>;

/// Full-field route with an arbitrary φ → (M^i, M^s) setting.
inline FringeScan fringe_scan(const JointAmplitude& amp, const std::function<TransferPair(double)>& setting,
                              const std::vector<double>& phi, int d, BasisKind kind) {
  detail::check_phase_coverage(phi);
  FringeScan scan{phi, std::vector<double>(phi.size()), ScanRoute::full_field, d, kind, 0.0, 0.0};
  for (std::size_t k = 0; k < phi.size(); ++k) {
    const auto [m_i, m_s] = setting(phi[k]);
    scan.signal[k] = coincidence_signal(amp, m_i, m_s);
  }
  detail::normalize_scan(scan);
  return scan;
}

/// Signal when only level k is open on both sides (the idler bin and its
/// signal partner), at the basis' fixed SLM scale.
inline double single_projection_signal(const JointAmplitude& amp, const std::shared_ptr<const BasisSet>& idler,
                                       const std::shared_ptr<const BasisSet>& signal, int k,
                                       double amplitude = 1.0) {
  const int d = idler->dimension();
  std::vector<double> a(d, 0.0);
  a[k] = amplitude;
  const std::vector<double> phases(d, 0.0);
  const auto m_i = transfer_from_coefficients({idler, a, phases, Side::idler, safe_scale(*idler)});
  const auto m_s = transfer_from_coefficients({signal, a, phases, Side::signal, safe_scale(*signal)});
  return coincidence_signal(amp, m_i, m_s);
}

struct CountRecord {
  std::vector<double> phi;
  std::vector<std::int64_t> gross;
  std::vector<std::int64_t> background;
  double duration_s = 0.0;
  std::uint64_t seed = 0;

  std::size_t size() const { return phi.size(); }
  double net(std::size_t k) const { return static_cast<double>(gross[k] - background[k]); }
  /// Poisson variance of the net counts.
  double variance(std::size_t k) const { return static_cast<double>(gross[k] + background[k]); }
};

/// Gross counts ~ Poisson((peak·S/max S + background)·T) per point, with an
/// independent background record ~ Poisson(background·T) for subtraction.
inline CountRecord synthesize_counts(const FringeScan& scan, double peak_rate_hz, double background_rate_hz,
                                     double duration_s, std::uint64_t seed) {
  if (!(peak_rate_hz >= 0.0) || !(background_rate_hz >= 0.0) || !(duration_s >= 0.0))
    throw DomainError("synthesize_counts: rates and duration must be non-negative");
  CountRecord record{scan.phi, {}, {}, duration_s, seed};
  const double peak = scan.signal.empty() ? 0.0 : *std::max_element(scan.signal.begin(), scan.signal.end());
  std::mt19937_64 rng(seed);
  auto draw = [&](double mean) -> std::int64_t {
    if (!(mean > 0.0)) return 0;
    return std::poisson_distribution<std::int64_t>(mean)(rng);
  };
  for (std::size_t k = 0; k < scan.size(); ++k) {
    const double rate = (peak > 0.0 ? peak_rate_hz * scan.signal[k] / peak : 0.0) + background_rate_hz;
    record.gross.push_back(draw(rate * duration_s));
    record.background.push_back(draw(background_rate_hz * duration_s));
  }
  return record;
}

/// Local filtering amplitudes |u_k| = (S_min/S_k)^{1/4}; a level's signal
/// scales as |u_k|⁴ when it is attenuated on both sides.
inline std::vector<double> procrustean_amplitudes(const std::vector<double>& single_projection_signals) {
  if (single_projection_signals.empty()) throw DomainError("procrustean_amplitudes: no signals");
  for (std::size_t k = 0; k < single_projection_signals.size(); ++k)
    if (!(single_projection_signals[k] > 0.0))
      throw DomainError("procrustean_amplitudes: level " + std::to_string(k) + " has no signal");
  const double s_min = *std::min_element(single_projection_signals.begin(), single_projection_signals.end());
  std::vector<double> u;
  for (double s : single_projection_signals) u.push_back(std::pow(s_min / s, 0.25));
  return u;
}

}  // namespace qshaper
