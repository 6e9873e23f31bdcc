#pragma once
// Shared test scenery: the default crystal pair and amplitude builders.

#include "qshaper/spectral_field.hpp"

namespace qshaper::testing {

inline constexpr double default_a2 = 23.5;  // rad/mm per (rad/fs)²
inline constexpr double default_psf = 9.6e-3;

inline CrystalSpec spdc_crystal(double a2 = default_a2) {
  return {11.5, 9.0, TaylorMismatch::phase_matched(9.0, a2), NonlinearProcess::spdc};
}

inline CrystalSpec sfg_crystal(double a2 = default_a2) {
  return {11.5, 9.0, TaylorMismatch::phase_matched(9.0, a2), NonlinearProcess::sfg};
}

inline PumpSpec cw_pump() { return PumpSpec::from_linewidth_mhz(5.0); }

inline JointAmplitude gamma_amplitude(int n, double a2 = default_a2, BuildOptions options = {}) {
  return build_joint_amplitude(SpectralGrid::symmetric(n, 0.35), cw_pump(), spdc_crystal(a2), sfg_crystal(a2),
                               options);
}

inline JointAmplitude gamma_psf_amplitude(int n, double a2 = default_a2, double psf = default_psf) {
  return apply_psf(gamma_amplitude(n, a2), psf);
}

}  // namespace qshaper::testing
