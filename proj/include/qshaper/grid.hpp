#pragma once

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "qshaper/error.hpp"
#include "qshaper/units.hpp"

namespace qshaper {

/// Uniform sampling of the relative frequency axis ω = Ω − ω_p/2, shared by
/// idler and signal. The window is symmetric and the point count odd, so
/// ω = 0 is a sample and k ↦ n−1−k maps ω to −ω exactly.
class SpectralGrid {
 public:
  SpectralGrid(int n_points, double omega_min, double omega_max,
               double center_wavelength_nm = 1064.0)
      : n_(n_points),
        omega_min_(omega_min),
        omega_max_(omega_max),
        center_wavelength_nm_(center_wavelength_nm) {
    if (n_points < 3 || n_points % 2 == 0)
      throw GridError("SpectralGrid: n_points must be odd and >= 3, got " +
                      std::to_string(n_points));
    if (!(omega_min < 0.0 && omega_max > 0.0))
      throw GridError("SpectralGrid: window must straddle zero");
    if (std::abs(omega_min + omega_max) > 1e-12 * omega_max)
      throw GridError("SpectralGrid: window must be symmetric (omega_min = -omega_max)");
    if (!(center_wavelength_nm > 0.0))
      throw GridError("SpectralGrid: center wavelength must be positive");
  }

  static SpectralGrid symmetric(int n_points, double omega_max,
                                double center_wavelength_nm = 1064.0) {
    return SpectralGrid(n_points, -omega_max, omega_max, center_wavelength_nm);
  }

  int size() const { return n_; }
  double omega_min() const { return omega_min_; }
  double omega_max() const { return omega_max_; }
  double width() const { return omega_max_ - omega_min_; }
  double spacing() const { return width() / (n_ - 1); }
  double center_wavelength_nm() const { return center_wavelength_nm_; }

  /// Degenerate idler/signal carrier Ω₀ = 2πc/λ₀ (rad/fs).
  double carrier_frequency() const {
    return units::angular_frequency_from_wavelength_nm(center_wavelength_nm_);
  }
  /// ω_p = 2Ω₀.
  double pump_center_frequency() const { return 2.0 * carrier_frequency(); }

  double omega(int k) const { return omega_min_ + k * spacing(); }

  Eigen::VectorXd axis() const {
    Eigen::VectorXd w(n_);
    for (int k = 0; k < n_; ++k) w[k] = omega(k);
    return w;
  }

  /// Index of ω = 0.
  int center_index() const { return n_ / 2; }

  bool same_axis(const SpectralGrid& other) const {
    return n_ == other.n_ && omega_min_ == other.omega_min_ && omega_max_ == other.omega_max_;
  }

 private:
  int n_;
  double omega_min_;
  double omega_max_;
  double center_wavelength_nm_;
};

inline void require_same_axis(const SpectralGrid& a, const SpectralGrid& b, const char* where) {
  if (!a.same_axis(b)) throw GridError(std::string(where) + ": grids differ");
}

/// Unnormalized sinc, sin(x)/x with sinc(0) = 1.
inline double sinc(double x) {
  if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

}  // namespace qshaper
