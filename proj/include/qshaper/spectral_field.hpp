#pragma once
// Two-photon spectral amplitude: pump envelope, quasi-phase-matched
// down-conversion and up-conversion, joint amplitudes and the finite
// resolution (point spread function) blur at the shaper plane.

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "qshaper/error.hpp"
#include "qshaper/grid.hpp"
#include "qshaper/units.hpp"

namespace qshaper {

using cdouble = std::complex<double>;

struct PumpSpec {
  double bandwidth = 0.0;  ///< intensity FWHM Δω_p [rad/fs]
  double wavelength_nm = 532.0;

  static PumpSpec from_linewidth_mhz(double linewidth_mhz, double wavelength_nm = 532.0) {
    return PumpSpec{units::angular_bandwidth_from_mhz(linewidth_mhz), wavelength_nm};
  }

  void validate() const {
    if (!(bandwidth > 0.0)) throw DomainError("PumpSpec: bandwidth must be positive");
    if (!(wavelength_nm > 0.0)) throw DomainError("PumpSpec: wavelength must be positive");
  }
};

/// Δk(ω_i, ω_s) = Δk₀ + a₁(ω_i+ω_s) + a₂(ω_i−ω_s)² + a₃(ω_i+ω_s)², expressed in
/// the down-conversion convention k_i + k_s − k_p [rad/mm].
struct TaylorMismatch {
  double dk0 = 0.0;
  double a1 = 0.0;
  double a2 = 0.0;
  double a3 = 0.0;

  /// Perfect quasi-phase matching for a given poling period, plus curvature.
  static TaylorMismatch phase_matched(double poling_period_um, double a2 = 0.0) {
    return TaylorMismatch{-units::grating_vector_per_mm(poling_period_um), 0.0, a2, 0.0};
  }

  double operator()(double omega_i, double omega_s) const {
    const double sum = omega_i + omega_s;
    const double diff = omega_i - omega_s;
    return dk0 + a1 * sum + a2 * diff * diff + a3 * sum * sum;
  }
};

/// Refractive index n²(λ) = A + B/(λ² − C) − Dλ² with λ in µm, shared by pump
/// and down-converted fields (type-0 interaction). k(Ω) = n(Ω)·Ω/c.
struct Sellmeier {
  double A = 1.0;
  double B = 0.0;
  double C = 0.0;
  double D = 0.0;
  double min_wavelength_um = 0.0;  ///< validity window, 0 = unbounded
  double max_wavelength_um = 0.0;
  double pump_center_frequency = 0.0;  ///< ω_p [rad/fs]

  double index(double wavelength_um) const {
    if ((min_wavelength_um > 0.0 && wavelength_um < min_wavelength_um) ||
        (max_wavelength_um > 0.0 && wavelength_um > max_wavelength_um))
      throw DomainError("Sellmeier: wavelength " + std::to_string(wavelength_um) +
                        " um outside validity window");
    const double l2 = wavelength_um * wavelength_um;
    const double n2 = A + B / (l2 - C) - D * l2;
    if (!(n2 > 0.0)) throw DomainError("Sellmeier: non-positive n^2");
    return std::sqrt(n2);
  }

  /// Wave number in rad/mm at absolute angular frequency Ω [rad/fs].
  double wave_number(double absolute_omega) const {
    if (!(absolute_omega > 0.0)) throw DomainError("Sellmeier: non-positive frequency");
    const double wavelength_um = units::two_pi * units::speed_of_light_um_per_fs / absolute_omega;
    return index(wavelength_um) * absolute_omega / units::speed_of_light_mm_per_fs;
  }

  double operator()(double omega_i, double omega_s) const {
    const double half = 0.5 * pump_center_frequency;
    return wave_number(half + omega_i) + wave_number(half + omega_s) -
           wave_number(pump_center_frequency + omega_i + omega_s);
  }
};

using DispersionModel = std::variant<TaylorMismatch, Sellmeier>;

enum class NonlinearProcess { spdc, sfg };

struct CrystalSpec {
  double length_mm = 11.5;
  double poling_period_um = 9.0;
  DispersionModel dispersion = TaylorMismatch{};
  NonlinearProcess role = NonlinearProcess::spdc;

  void validate() const {
    if (!(length_mm > 0.0)) throw DomainError("CrystalSpec: length must be positive");
    if (!(poling_period_um > 0.0)) throw DomainError("CrystalSpec: poling period must be positive");
  }
};

/// α(ω_i, ω_s) as a function of ω_i + ω_s.
inline double pump_envelope(double omega_sum, const PumpSpec& pump) {
  const double bw = pump.bandwidth;
  return std::exp(-omega_sum * omega_sum * 2.0 * std::log(2.0) / (bw * bw));
}

/// Δk_DC = k_i + k_s − k_p for down-conversion, Δk_SFG = −Δk_DC for up-conversion.
inline double phase_mismatch(double omega_i, double omega_s, const CrystalSpec& crystal) {
  const double dk_dc =
      std::visit([&](const auto& model) { return model(omega_i, omega_s); }, crystal.dispersion);
  return crystal.role == NonlinearProcess::spdc ? dk_dc : -dk_dc;
}

/// Argument x = (Δk ± 2π/G)·L/2 of the phase-matching sinc.
inline double phase_matching_argument(double omega_i, double omega_s, const CrystalSpec& crystal) {
  const double grating = units::grating_vector_per_mm(crystal.poling_period_um);
  const double sign = crystal.role == NonlinearProcess::spdc ? 1.0 : -1.0;
  return (phase_mismatch(omega_i, omega_s, crystal) + sign * grating) * crystal.length_mm / 2.0;
}

/// sinc(x)·e^{ix}; the phase factor is dropped unless requested since it is
/// indistinguishable from residual dispersion that the setup compensates.
inline cdouble phase_matching(double omega_i, double omega_s, const CrystalSpec& crystal,
                              bool include_phase = false) {
  const double x = phase_matching_argument(omega_i, omega_s, crystal);
  const double magnitude = sinc(x);
  if (!include_phase) return {magnitude, 0.0};
  return magnitude * std::polar(1.0, x);
}

enum class AmplitudeKind { lambda, gamma, gamma_psf };

inline const char* to_string(AmplitudeKind kind) {
  switch (kind) {
    case AmplitudeKind::lambda: return "Lambda";
    case AmplitudeKind::gamma: return "Gamma";
    case AmplitudeKind::gamma_psf: return "GammaPSF";
  }
  return "?";
}

struct AmplitudeMetadata {
  bool pump_clamped = false;
  double effective_pump_bandwidth = 0.0;
  double psf_width = 0.0;
  bool psf_subresolution = false;  ///< PSF narrower than one grid cell
};

/// Complex joint amplitude sampled on grid × grid. Row index ↔ ω_i, column
/// index ↔ ω_s. Always normalized so that Σ|values|²·Δω² = 1.
class JointAmplitude {
 public:
  JointAmplitude(SpectralGrid grid, Eigen::MatrixXcd values, AmplitudeKind kind,
                 AmplitudeMetadata metadata = {})
      : grid_(grid), values_(std::move(values)), kind_(kind), metadata_(metadata) {
    if (values_.rows() != grid_.size() || values_.cols() != grid_.size())
      throw GridError("JointAmplitude: value matrix does not match grid");
    if (!values_.allFinite()) throw DomainError("JointAmplitude: non-finite values");
    const double n = norm();
    if (!(n > 0.0)) throw DomainError("JointAmplitude: amplitude vanishes on the grid");
    values_ /= std::sqrt(n);
  }

  const SpectralGrid& grid() const { return grid_; }
  const Eigen::MatrixXcd& values() const { return values_; }
  AmplitudeKind kind() const { return kind_; }
  const AmplitudeMetadata& metadata() const { return metadata_; }

  /// Σ|Γ|²·Δω²
  double norm() const {
    const double h = grid_.spacing();
    return values_.squaredNorm() * h * h;
  }

  bool is_real() const { return values_.imag().cwiseAbs().maxCoeff() == 0.0; }

  double symmetry_defect() const {
    return (values_ - values_.transpose()).cwiseAbs().maxCoeff();
  }

 private:
  SpectralGrid grid_;
  Eigen::MatrixXcd values_;
  AmplitudeKind kind_;
  AmplitudeMetadata metadata_;
};

struct BuildOptions {
  bool include_phase = false;
  /// Pump bandwidths narrower than this many grid cells are clamped to it.
  double min_pump_cells = 3.0;
};

namespace detail {

// Samples inside the main lobe |x| < π along a line of grid points.
template <class PointFn>
int main_lobe_samples(int n, const CrystalSpec& crystal, PointFn point) {
  int count = 0;
  for (int k = 0; k < n; ++k) {
    const auto [wi, ws] = point(k);
    if (std::abs(phase_matching_argument(wi, ws, crystal)) < units::pi) ++count;
  }
  return count;
}

inline void check_lobe_resolution(const SpectralGrid& grid, const CrystalSpec& crystal) {
  const int n = grid.size();
  const int across = main_lobe_samples(n, crystal, [&](int k) {
    return std::pair{grid.omega(k), grid.omega(n - 1 - k)};
  });
  const int along = main_lobe_samples(n, crystal, [&](int k) {
    return std::pair{grid.omega(k), grid.omega(k)};
  });
  for (int count : {across, along}) {
    if (count < 8 && count < n)
      throw ResolutionError("build_joint_amplitude: phase-matching main lobe covered by only " +
                            std::to_string(count) + " samples (need >= 8)");
  }
}

}  // namespace detail

/// Λ ∝ α·Φ_DC, or Γ ∝ α·Φ_DC·Φ_SFG when an up-conversion crystal is given.
inline JointAmplitude build_joint_amplitude(const SpectralGrid& grid, const PumpSpec& pump,
                                            const CrystalSpec& spdc,
                                            const std::optional<CrystalSpec>& sfg = std::nullopt,
                                            const BuildOptions& options = {}) {
  pump.validate();
  spdc.validate();
  if (spdc.role != NonlinearProcess::spdc)
    throw DomainError("build_joint_amplitude: source crystal must have the SPDC role");
  detail::check_lobe_resolution(grid, spdc);
  if (sfg) {
    sfg->validate();
    if (sfg->role != NonlinearProcess::sfg)
      throw DomainError("build_joint_amplitude: detection crystal must have the SFG role");
    detail::check_lobe_resolution(grid, *sfg);
  }

  AmplitudeMetadata meta;
  PumpSpec effective = pump;
  const double floor = options.min_pump_cells * grid.spacing();
  if (pump.bandwidth < floor) {
    effective.bandwidth = floor;
    meta.pump_clamped = true;
  }
  meta.effective_pump_bandwidth = effective.bandwidth;

  const int n = grid.size();
  const Eigen::VectorXd w = grid.axis();
  Eigen::MatrixXcd values(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      cdouble v = pump_envelope(w[i] + w[j], effective) *
                  phase_matching(w[i], w[j], spdc, options.include_phase);
      if (sfg) v *= phase_matching(w[i], w[j], *sfg, options.include_phase);
      values(i, j) = v;
    }
  }
  return JointAmplitude(grid, std::move(values), sfg ? AmplitudeKind::gamma : AmplitudeKind::lambda,
                        meta);
}

/// Sampled point spread function exp(−(ω_i²+ω_s²)·2ln2/Δ²) along one axis.
inline double psf_profile(double omega, double width) {
  return std::exp(-omega * omega * 2.0 * std::log(2.0) / (width * width));
}

/// Γ ⊗ PSF on the grid. The isotropic Gaussian kernel is separable, so the 2-D
/// Fourier-domain product factorizes into zero-padded 1-D transforms along
/// rows and then columns (linear, not circular, convolution).
inline JointAmplitude apply_psf(const JointAmplitude& amp, double width) {
  if (!(width >= 0.0)) throw DomainError("apply_psf: width must be non-negative");
  AmplitudeMetadata meta = amp.metadata();
  meta.psf_width = width;
  if (width == 0.0)
    return JointAmplitude(amp.grid(), amp.values(), AmplitudeKind::gamma_psf, meta);

  const SpectralGrid& grid = amp.grid();
  const int n = grid.size();
  const double h = grid.spacing();
  meta.psf_subresolution = width < h;

  int padded = 1;
  while (padded < 2 * n - 1) padded *= 2;

  std::vector<cdouble> kernel(padded, 0.0);
  for (int m = -(n - 1); m <= n - 1; ++m)
    kernel[(m + padded) % padded] = psf_profile(m * h, width);

  Eigen::FFT<double> fft;
  std::vector<cdouble> kernel_hat;
  fft.fwd(kernel_hat, kernel);

  Eigen::MatrixXcd out = amp.values();
  std::vector<cdouble> line(padded), line_hat, result;
  auto convolve = [&](auto&& vec) {
    std::fill(line.begin(), line.end(), cdouble{});
    for (int k = 0; k < n; ++k) line[k] = vec(k);
    fft.fwd(line_hat, line);
    for (int k = 0; k < padded; ++k) line_hat[k] *= kernel_hat[k];
    fft.inv(result, line_hat);
    for (int k = 0; k < n; ++k) vec(k) = result[k];
  };
  for (int r = 0; r < n; ++r) convolve(out.row(r));
  for (int c = 0; c < n; ++c) convolve(out.col(c));

  return JointAmplitude(grid, std::move(out), AmplitudeKind::gamma_psf, meta);
}

struct FluxLimit {
  double flux_per_s = 0.0;  ///< Φ_max ≈ Δν_DC
  double power_W = 0.0;
};

/// Single-photon-limit flux: one photon per inverse bandwidth, Φ_max = cΔλ/λ².
inline FluxLimit photon_flux_limit(double bandwidth_nm, double center_wavelength_nm) {
  if (!(bandwidth_nm > 0.0) || !(center_wavelength_nm > 0.0))
    throw DomainError("photon_flux_limit: inputs must be positive");
  const double lambda_m = center_wavelength_nm * 1e-9;
  const double flux = units::speed_of_light_m_per_s * bandwidth_nm * 1e-9 / (lambda_m * lambda_m);
  const double photon_energy = units::planck_J_s * units::speed_of_light_m_per_s / lambda_m;
  return {flux, flux * photon_energy};
}

/// Mean photon number per spectral mode, n = P/P_max.
inline double spectral_mode_density(double power_W, const FluxLimit& limit) {
  return power_W / limit.power_W;
}

}  // namespace qshaper
