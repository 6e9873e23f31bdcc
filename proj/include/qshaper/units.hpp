#pragma once
// Physical constants and unit conversions.
//
// Internally every frequency is an angular frequency in rad/fs, every time in
// fs, crystal lengths in mm and wave numbers in rad/mm. Wavelengths (nm) and
// linewidths (MHz) are only accepted at the boundary and converted here.

#include <cmath>
#include <numbers>

namespace qshaper::units {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline constexpr double speed_of_light_m_per_s = 299792458.0;
inline constexpr double speed_of_light_nm_per_fs = 299.792458;
inline constexpr double speed_of_light_um_per_fs = 0.299792458;
inline constexpr double speed_of_light_mm_per_fs = 2.99792458e-4;
inline constexpr double planck_J_s = 6.62607015e-34;

/// Ω = 2πc/λ, λ in nm, result in rad/fs.
inline double angular_frequency_from_wavelength_nm(double wavelength_nm) {
  return two_pi * speed_of_light_nm_per_fs / wavelength_nm;
}

inline double wavelength_nm_from_angular_frequency(double omega) {
  return two_pi * speed_of_light_nm_per_fs / omega;
}

/// Δω = 2π Δν, Δν in MHz, result in rad/fs.
inline double angular_bandwidth_from_mhz(double linewidth_mhz) {
  return two_pi * linewidth_mhz * 1e6 * 1e-15;
}

/// Δω = 2πc Δλ / λ², valid for Δλ ≪ λ.
inline double angular_bandwidth_from_nm(double bandwidth_nm, double center_nm) {
  return two_pi * speed_of_light_nm_per_fs * bandwidth_nm / (center_nm * center_nm);
}

inline double bandwidth_nm_from_angular(double bandwidth, double center_nm) {
  return bandwidth * center_nm * center_nm / (two_pi * speed_of_light_nm_per_fs);
}

/// Quasi-phase-matching grating vector 2π/G in rad/mm, G in µm.
inline double grating_vector_per_mm(double poling_period_um) {
  return two_pi / (poling_period_um * 1e-3);
}

}  // namespace qshaper::units
