#pragma once
// Orthonormal single-photon bases used to discretize the spectrum into qudit
// levels: rectangular frequency bins, time bins (rectangles in time, i.e.
// sinc-apodized phasors in frequency) and Schmidt modes of a joint amplitude.

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qshaper/error.hpp"
#include "qshaper/grid.hpp"
#include "qshaper/schmidt.hpp"
#include "qshaper/spectral_field.hpp"

namespace qshaper {

enum class BasisKind { frequency_bin, time_bin, schmidt };

inline const char* to_string(BasisKind kind) {
  switch (kind) {
    case BasisKind::frequency_bin: return "frequency_bin";
    case BasisKind::time_bin: return "time_bin";
    case BasisKind::schmidt: return "schmidt";
  }
  return "?";
}

/// d functions f_j(ω) sampled on the grid axis (one column per level).
struct BasisSet {
  SpectralGrid grid;
  BasisKind kind;
  Eigen::MatrixXcd functions;   ///< n × d
  std::vector<double> centers;  ///< ω_j [rad/fs] or t_j [fs]
  std::vector<double> widths;   ///< Δω_j or Δt_j
  std::vector<double> weights;  ///< β_j for Schmidt modes
  /// ∫|f_j|²dω of the closed-form functions before grid renormalization
  /// (0 for zero-width time bins, which have no continuum normalization).
  std::vector<double> raw_norms;
  Eigen::MatrixXcd gram;  ///< ∫f_j* f_k dω after renormalization

  int dimension() const { return static_cast<int>(functions.cols()); }
  Eigen::VectorXcd function(int j) const { return functions.col(j); }
};

/// G_jk = ∫ f_j*(ω) f_k(ω) dω on the grid (cell rule, weight Δω per sample).
inline Eigen::MatrixXcd gram_matrix(const BasisSet& basis) {
  return basis.functions.adjoint() * basis.functions * basis.grid.spacing();
}

inline double orthonormality_defect(const BasisSet& basis) {
  const int d = basis.dimension();
  return (gram_matrix(basis) - Eigen::MatrixXcd::Identity(d, d)).cwiseAbs().maxCoeff();
}

namespace detail {

inline void renormalize_columns(BasisSet& basis) {
  const double h = basis.grid.spacing();
  for (int j = 0; j < basis.dimension(); ++j) {
    const double norm = std::sqrt(basis.functions.col(j).squaredNorm() * h);
    if (!(norm > 0.0)) throw BasisError("basis function " + std::to_string(j) + " vanishes on the grid");
    basis.functions.col(j) /= norm;
  }
  basis.gram = gram_matrix(basis);
}

inline void check_separation(const std::vector<double>& centers, const std::vector<double>& widths,
                             const char* where) {
  if (centers.size() != widths.size())
    throw BasisError(std::string(where) + ": centers and widths differ in length");
  if (centers.empty()) throw BasisError(std::string(where) + ": need at least one level");
  for (std::size_t j = 0; j < centers.size(); ++j) {
    if (!(widths[j] >= 0.0)) throw BasisError(std::string(where) + ": negative width");
    for (std::size_t k = j + 1; k < centers.size(); ++k) {
      if (!(std::abs(centers[j] - centers[k]) > 0.5 * (widths[j] + widths[k])))
        throw BasisError(std::string(where) + ": levels " + std::to_string(j) + " and " +
                         std::to_string(k) + " overlap");
    }
  }
}

}  // namespace detail

/// Rectangles of height 1/√Δω_j on |ω − ω_j| < Δω_j/2.
inline BasisSet frequency_bins(const std::vector<double>& centers, const std::vector<double>& widths,
                               const SpectralGrid& grid) {
  detail::check_separation(centers, widths, "frequency_bins");
  const int n = grid.size();
  const int d = static_cast<int>(centers.size());
  BasisSet basis{grid, BasisKind::frequency_bin, Eigen::MatrixXcd::Zero(n, d), centers, widths, {}, {}, {}};
  const double h = grid.spacing();
  for (int j = 0; j < d; ++j) {
    if (!(widths[j] > 0.0)) throw BasisError("frequency_bins: bin widths must be positive");
    int covered = 0;
    const double height = 1.0 / std::sqrt(widths[j]);
    for (int k = 0; k < n; ++k) {
      if (std::abs(grid.omega(k) - centers[j]) < 0.5 * widths[j]) {
        basis.functions(k, j) = height;
        ++covered;
      }
    }
    if (covered < 3)
      throw ResolutionError("frequency_bins: bin " + std::to_string(j) + " covers " +
                            std::to_string(covered) + " samples (need >= 3)");
    basis.raw_norms.push_back(height * height * covered * h);
  }
  detail::renormalize_columns(basis);
  return basis;
}

/// Time bins f_j(ω) = √(Δt_j/2π)·e^{−iωt_j}·sinc(ωΔt_j/2). A zero width means
/// the bare phasor e^{−iωt_j}, apodized by the grid window (the SLM aperture).
/// The finite window makes distinct bins overlap slightly; the residual
/// off-diagonal Gram elements are kept in `gram`.
inline BasisSet time_bins(const std::vector<double>& centers, const std::vector<double>& widths,
                          const SpectralGrid& grid) {
  detail::check_separation(centers, widths, "time_bins");
  const int n = grid.size();
  const int d = static_cast<int>(centers.size());
  BasisSet basis{grid, BasisKind::time_bin, Eigen::MatrixXcd::Zero(n, d), centers, widths, {}, {}, {}};
  const double h = grid.spacing();
  for (int j = 0; j < d; ++j) {
    const double t = centers[j];
    const double dt = widths[j];
    const double prefactor = dt > 0.0 ? std::sqrt(dt / units::two_pi) : 1.0;
    for (int k = 0; k < n; ++k) {
      const double w = grid.omega(k);
      const double envelope = dt > 0.0 ? sinc(w * dt / 2.0) : 1.0;
      basis.functions(k, j) = prefactor * envelope * std::polar(1.0, -w * t);
    }
    basis.raw_norms.push_back(dt > 0.0 ? basis.functions.col(j).squaredNorm() * h : 0.0);
  }
  detail::renormalize_columns(basis);
  return basis;
}

enum class Side { idler, signal };

namespace detail {

inline BasisSet schmidt_basis(const SpectralGrid& grid, const SchmidtDecomposition& decomposition,
                              int d, Side side) {
  BasisSet basis{grid, BasisKind::schmidt,
                 side == Side::idler ? decomposition.idler_modes.leftCols(d)
                                     : decomposition.signal_modes.leftCols(d),
                 {}, {}, {}, {}, {}};
  for (int j = 0; j < d; ++j) {
    basis.weights.push_back(decomposition.weights[j]);
    basis.raw_norms.push_back(1.0);
  }
  basis.gram = gram_matrix(basis);
  return basis;
}

inline SchmidtDecomposition checked_decomposition(const JointAmplitude& amp, int d) {
  if (d < 1) throw BasisError("schmidt_modes: d must be >= 1");
  auto decomposition = decompose_schmidt(amp, d);
  if (decomposition.weights.size() < d || decomposition.weights[d - 1] < 1e-12)
    throw RankError("schmidt_modes: d = " + std::to_string(d) + " exceeds numerical rank");
  return decomposition;
}

}  // namespace detail

/// Leading d Schmidt modes of `amp` for one photon, with β_j in `weights`.
/// Idler and signal modes coincide for a real symmetric amplitude up to the
/// sign of the corresponding eigenvalue.
inline BasisSet schmidt_modes(const JointAmplitude& amp, int d, Side side = Side::idler) {
  return detail::schmidt_basis(amp.grid(), detail::checked_decomposition(amp, d), d, side);
}

struct BasisPair {
  BasisSet idler;
  BasisSet signal;
};

/// Idler and signal Schmidt bases from a single decomposition.
inline BasisPair schmidt_mode_pair(const JointAmplitude& amp, int d) {
  const auto decomposition = detail::checked_decomposition(amp, d);
  return {detail::schmidt_basis(amp.grid(), decomposition, d, Side::idler),
          detail::schmidt_basis(amp.grid(), decomposition, d, Side::signal)};
}

/// f(ω) → f(−ω). Pairs idler bins with their energy-conserving signal partners
/// (ω_s ≈ −ω_i for a narrow-band pump).
inline BasisSet mirrored(const BasisSet& basis) {
  BasisSet out = basis;
  out.functions = basis.functions.colwise().reverse();
  if (basis.kind != BasisKind::schmidt)
    for (double& c : out.centers) c = -c;
  out.gram = gram_matrix(out);
  return out;
}

}  // namespace qshaper
