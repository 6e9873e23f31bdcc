#pragma once
// Single-photon transfer functions M(ω) applied by the spatial light
// modulator: built from basis coefficients, from the Franson interferometer
// model, and optionally quantized onto the SLM pixel layout.

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qshaper/bases.hpp"
#include "qshaper/error.hpp"
#include "qshaper/grid.hpp"

namespace qshaper {

/// M(ω) = Σ_j |u_j| e^{iφ_j} f_j*(ω) for one photon.
struct TransferSpec {
  std::shared_ptr<const BasisSet> basis;
  std::vector<double> amplitudes;  ///< |u_j| ∈ [0, 1]
  std::vector<double> phases;      ///< φ_j [rad]
  Side side = Side::idler;
  /// Use this global factor instead of 1/max|M|. Keeps a series of related
  /// settings (fringe points, single-bin projections) on one normalization.
  std::optional<double> fixed_scale;

  void validate() const {
    if (!basis) throw BasisError("TransferSpec: missing basis");
    const auto d = static_cast<std::size_t>(basis->dimension());
    if (amplitudes.size() != d || phases.size() != d)
      throw GridError("TransferSpec: coefficient count differs from basis dimension");
    for (double a : amplitudes)
      if (!(a >= 0.0 && a <= 1.0)) throw DomainError("TransferSpec: |u_j| must lie in [0, 1]");
    if (fixed_scale && !(*fixed_scale > 0.0))
      throw DomainError("TransferSpec: fixed scale must be positive");
  }
};

class TransferFunction {
 public:
  TransferFunction(SpectralGrid grid, Eigen::VectorXcd samples, double normalization_factor = 1.0,
                   std::string source = {})
      : grid_(grid),
        samples_(std::move(samples)),
        normalization_factor_(normalization_factor),
        source_(std::move(source)) {
    if (samples_.size() != grid_.size()) throw GridError("TransferFunction: sample count != grid size");
    if (!samples_.allFinite()) throw DomainError("TransferFunction: non-finite samples");
    if (max_abs() > 1.0 + 1e-12)
      throw DomainError("TransferFunction: |M| exceeds 1 (" + std::to_string(max_abs()) + ")");
  }

  const SpectralGrid& grid() const { return grid_; }
  const Eigen::VectorXcd& samples() const { return samples_; }
  double normalization_factor() const { return normalization_factor_; }
  const std::string& source() const { return source_; }
  bool pixelated() const { return pixelated_; }
  double max_abs() const { return samples_.size() ? samples_.cwiseAbs().maxCoeff() : 0.0; }

  TransferFunction scaled(double factor) const {
    TransferFunction out = *this;
    out.samples_ *= factor;
    out.normalization_factor_ *= factor;
    if (out.max_abs() > 1.0 + 1e-12) throw DomainError("TransferFunction::scaled: |M| exceeds 1");
    return out;
  }

  static TransferFunction unity(const SpectralGrid& grid) {
    return TransferFunction(grid, Eigen::VectorXcd::Ones(grid.size()), 1.0, "unity");
  }

 private:
  friend TransferFunction pixelate_impl(const TransferFunction&, Eigen::VectorXcd);
  SpectralGrid grid_;
  Eigen::VectorXcd samples_;
  double normalization_factor_ = 1.0;
  std::string source_;
  bool pixelated_ = false;
};

inline TransferFunction pixelate_impl(const TransferFunction& m, Eigen::VectorXcd samples) {
  TransferFunction out(m.grid(), std::move(samples), m.normalization_factor(), m.source());
  out.pixelated_ = true;
  return out;
}

/// Largest global factor keeping |M| ≤ 1 for every choice of |u_j| ≤ 1 and
/// phases: 1 / max_ω Σ_j |f_j(ω)|.
inline double safe_scale(const BasisSet& basis) {
  const double peak = basis.functions.cwiseAbs().rowwise().sum().maxCoeff();
  if (!(peak > 0.0)) throw BasisError("safe_scale: basis vanishes");
  return 1.0 / peak;
}

/// Unnormalized Σ_j u_j f_j*(ω).
inline Eigen::VectorXcd raw_transfer(const TransferSpec& spec) {
  const BasisSet& basis = *spec.basis;
  Eigen::VectorXcd coefficients(basis.dimension());
  for (int j = 0; j < basis.dimension(); ++j)
    coefficients[j] = std::polar(spec.amplitudes[j], spec.phases[j]);
  return basis.functions.conjugate() * coefficients;
}

inline TransferFunction transfer_from_coefficients(const TransferSpec& spec) {
  spec.validate();
  Eigen::VectorXcd m = raw_transfer(spec);
  double factor = 1.0;
  if (spec.fixed_scale) {
    factor = *spec.fixed_scale;
  } else {
    const double peak = m.cwiseAbs().maxCoeff();
    if (peak > 1.0) factor = 1.0 / peak;
  }
  m *= factor;
  return TransferFunction(spec.basis->grid, std::move(m), factor,
                          std::string("coefficients:") + to_string(spec.basis->kind));
}

/// Unbalanced Mach-Zehnder: M(ω) = T + R·e^{i(ωΔt₁₀ + φ)}.
inline TransferFunction franson_transfer(double T, double R, double delay_fs, double phase,
                                         const SpectralGrid& grid) {
  if (!(T >= 0.0 && R >= 0.0)) throw DomainError("franson_transfer: T and R must be non-negative");
  if (T + R > 1.0 + 1e-12) throw DomainError("franson_transfer: T + R must not exceed 1");
  Eigen::VectorXcd m(grid.size());
  for (int k = 0; k < grid.size(); ++k) m[k] = T + R * std::polar(1.0, grid.omega(k) * delay_fs + phase);
  double factor = 1.0;
  const double peak = m.cwiseAbs().maxCoeff();
  if (peak > 1.0) {
    factor = 1.0 / peak;
    m *= factor;
  }
  return TransferFunction(grid, std::move(m), factor, "franson");
}

/// Pixelated liquid-crystal array with an affine ω → position map
/// x(ω) = offset_um + um_per_unit·ω.
struct SlmModel {
  int n_pixels = 640;
  double pixel_width_um = 100.0;
  double gap_um = 3.0;
  double offset_um = 0.0;
  double um_per_unit = 0.0;  ///< µm per rad/fs

  double pitch_um() const { return pixel_width_um + gap_um; }
  double aperture_um() const { return n_pixels * pitch_um() - gap_um; }

  void validate() const {
    if (n_pixels < 1) throw DomainError("SlmModel: need at least one pixel");
    if (!(pixel_width_um > 0.0) || !(gap_um >= 0.0))
      throw DomainError("SlmModel: pixel width must be positive and gap non-negative");
    if (!(um_per_unit > 0.0)) throw DomainError("SlmModel: mapping slope must be positive");
  }

  /// Maps the grid window onto the full aperture.
  static SlmModel spanning(const SpectralGrid& grid, int n_pixels = 640, double pixel_width_um = 100.0,
                           double gap_um = 3.0) {
    SlmModel slm{n_pixels, pixel_width_um, gap_um, 0.0, 0.0};
    slm.um_per_unit = slm.aperture_um() / grid.width();
    slm.offset_um = -slm.um_per_unit * grid.omega_min();
    return slm;
  }
};

/// Replace M by its mean over the samples falling on each pixel. Samples on
/// inter-pixel gaps or off the aperture are opaque.
inline TransferFunction pixelate(const TransferFunction& m, const SlmModel& slm) {
  slm.validate();
  const SpectralGrid& grid = m.grid();
  const int n = grid.size();
  std::vector<int> pixel_of(n, -1);
  int unmapped = 0;
  for (int k = 0; k < n; ++k) {
    const double x = slm.offset_um + slm.um_per_unit * grid.omega(k);
    if (x < 0.0 || x >= slm.n_pixels * slm.pitch_um()) {
      ++unmapped;
      continue;
    }
    const int p = static_cast<int>(std::floor(x / slm.pitch_um()));
    if (x - p * slm.pitch_um() < slm.pixel_width_um) pixel_of[k] = p;
  }
  if (unmapped > 0.1 * n)
    throw MappingError("pixelate: " + std::to_string(unmapped) + " of " + std::to_string(n) +
                       " samples fall outside the SLM aperture");

  std::vector<cdouble> sum(slm.n_pixels, 0.0);
  std::vector<int> count(slm.n_pixels, 0);
  for (int k = 0; k < n; ++k) {
    if (pixel_of[k] < 0) continue;
    sum[pixel_of[k]] += m.samples()[k];
    ++count[pixel_of[k]];
  }
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(n);
  for (int k = 0; k < n; ++k)
    if (pixel_of[k] >= 0) out[k] = sum[pixel_of[k]] / static_cast<double>(count[pixel_of[k]]);
  return pixelate_impl(m, std::move(out));
}

/// M(ω_i, ω_s) = M^i(ω_i)·M^s(ω_s), evaluated on demand.
class TwoPhotonModulation {
 public:
  TwoPhotonModulation(const TransferFunction& idler, const TransferFunction& signal)
      : idler_(idler.samples()), signal_(signal.samples()) {
    require_same_axis(idler.grid(), signal.grid(), "combined_modulation");
  }

  cdouble operator()(int i, int j) const { return idler_[i] * signal_[j]; }
  const Eigen::VectorXcd& idler() const { return idler_; }
  const Eigen::VectorXcd& signal() const { return signal_; }

 private:
  Eigen::VectorXcd idler_;
  Eigen::VectorXcd signal_;
};

inline TwoPhotonModulation combined_modulation(const TransferFunction& m_i, const TransferFunction& m_s) {
  return TwoPhotonModulation(m_i, m_s);
}

}  // namespace qshaper
