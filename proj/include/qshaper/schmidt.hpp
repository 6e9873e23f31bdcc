#pragma once
// Discrete Schmidt decomposition of a joint amplitude.
//
// With A = Γ·Δω (so that ‖A‖_F = 1) the decomposition A = Σ σ_j u_j v_jᵀ gives
// β_j = σ_j² and continuum modes f^i_j = u_j/√Δω, f^s_j = v_j/√Δω, so that
// Γ(ω_i, ω_s) = Σ √β_j f^i_j(ω_i) f^s_j(ω_s) (no conjugate on the signal side).
//
// The weights come from diagonalizing the reduced density matrix ρ_i = A A†.
// A real symmetric amplitude is diagonalized directly instead, which keeps
// small weights accurate down to machine precision relative to σ_0 rather than
// σ_0².

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "qshaper/error.hpp"
#include "qshaper/spectral_field.hpp"

namespace qshaper {

struct SchmidtDecomposition {
  Eigen::VectorXd weights;        ///< β_j, descending
  Eigen::MatrixXcd idler_modes;   ///< n × m, columns normalized in ∫|f|²dω
  Eigen::MatrixXcd signal_modes;  ///< n × m
};

namespace detail {

inline std::vector<int> order_descending(const Eigen::VectorXd& key) {
  std::vector<int> order(key.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return key[a] > key[b]; });
  return order;
}

// Rotate the pair (u, v) by a common phase so the largest-magnitude sample of
// u is real positive; u_j v_jᵀ is unchanged.
inline void fix_mode_phase(Eigen::Ref<Eigen::VectorXcd> u, Eigen::Ref<Eigen::VectorXcd> v) {
  Eigen::Index k = 0;
  u.cwiseAbs().maxCoeff(&k);
  const double magnitude = std::abs(u[k]);
  if (magnitude == 0.0) return;
  const cdouble rotation = std::conj(u[k]) / magnitude;
  u *= rotation;
  v /= rotation;
  u[k] = cdouble(u[k].real(), 0.0);
}

}  // namespace detail

/// Weights and the leading `keep_modes` mode pairs. keep_modes = 0 computes
/// weights only; keep_modes < 0 keeps every mode.
inline SchmidtDecomposition decompose_schmidt(const JointAmplitude& amp, int keep_modes = 0) {
  const Eigen::MatrixXcd& values = amp.values();
  if (!values.allFinite()) throw DomainError("decompose_schmidt: non-finite amplitude");
  const int n = amp.grid().size();
  const double h = amp.grid().spacing();
  const bool want_modes = keep_modes != 0;
  const int m = keep_modes < 0 ? n : std::min(keep_modes, n);
  const double scale_to_f = 1.0 / std::sqrt(h);

  SchmidtDecomposition out;
  const double peak = values.cwiseAbs().maxCoeff();
  const bool real_symmetric = amp.is_real() && amp.symmetry_defect() <= 1e-12 * peak;
  const int options = want_modes ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly;

  if (real_symmetric) {
    const Eigen::MatrixXd a = values.real() * h;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, options);
    if (solver.info() != Eigen::Success) throw Error("decompose_schmidt: eigensolver failed");
    const Eigen::VectorXd lambda = solver.eigenvalues();
    const auto order = detail::order_descending(lambda.cwiseAbs());
    out.weights.resize(n);
    for (int j = 0; j < n; ++j) out.weights[j] = lambda[order[j]] * lambda[order[j]];
    if (want_modes) {
      out.idler_modes.resize(n, m);
      out.signal_modes.resize(n, m);
      for (int j = 0; j < m; ++j) {
        const Eigen::VectorXd e = solver.eigenvectors().col(order[j]);
        const double sign = lambda[order[j]] < 0.0 ? -1.0 : 1.0;
        Eigen::VectorXcd u = e.cast<cdouble>() * scale_to_f;
        Eigen::VectorXcd v = (sign * e).cast<cdouble>() * scale_to_f;
        detail::fix_mode_phase(u, v);
        out.idler_modes.col(j) = u;
        out.signal_modes.col(j) = v;
      }
    }
    return out;
  }

  const Eigen::MatrixXcd a = values * h;
  const Eigen::MatrixXcd rho = a * a.adjoint();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(rho, options);
  if (solver.info() != Eigen::Success) throw Error("decompose_schmidt: eigensolver failed");
  const Eigen::VectorXd beta = solver.eigenvalues().cwiseMax(0.0);
  const auto order = detail::order_descending(beta);
  out.weights.resize(n);
  for (int j = 0; j < n; ++j) out.weights[j] = beta[order[j]];
  if (want_modes) {
    out.idler_modes.resize(n, m);
    out.signal_modes.resize(n, m);
    for (int j = 0; j < m; ++j) {
      Eigen::VectorXcd u = solver.eigenvectors().col(order[j]);
      const double sigma = std::sqrt(out.weights[j]);
      // v_j = Aᵀ u*_j / σ_j  (so that A = Σ σ u vᵀ)
      Eigen::VectorXcd v = sigma > 0.0 ? Eigen::VectorXcd(a.transpose() * u.conjugate() / sigma)
                                       : Eigen::VectorXcd::Zero(n);
      // Signal modes are defined through A; renormalize away eigenvector noise.
      if (sigma > 0.0) v /= v.norm();
      u *= scale_to_f;
      v *= scale_to_f;
      detail::fix_mode_phase(u, v);
      out.idler_modes.col(j) = u;
      out.signal_modes.col(j) = v;
    }
  }
  return out;
}

}  // namespace qshaper
