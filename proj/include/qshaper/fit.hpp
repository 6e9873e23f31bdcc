#pragma once
// Box-constrained Levenberg-Marquardt for small dense problems.

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qshaper/error.hpp"

namespace qshaper {

struct LeastSquaresProblem {
  /// Weighted residuals r(p) and their Jacobian ∂r/∂p.
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> residuals;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> jacobian;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

struct LeastSquaresOptions {
  int max_iterations = 500;
  double step_tolerance = 1e-13;
  double cost_tolerance = 1e-15;
};

struct LeastSquaresSolution {
  Eigen::VectorXd parameters;
  Eigen::MatrixXd normal_matrix;  ///< JᵀJ at the solution
  double cost = 0.0;              ///< Σ r²
  int iterations = 0;
};

inline Eigen::VectorXd clamp_to_box(const Eigen::VectorXd& p, const LeastSquaresProblem& problem) {
  return p.cwiseMax(problem.lower).cwiseMin(problem.upper);
}

inline LeastSquaresSolution levenberg_marquardt(const LeastSquaresProblem& problem, Eigen::VectorXd start,
                                                const LeastSquaresOptions& options = {}) {
  Eigen::VectorXd p = clamp_to_box(start, problem);
  Eigen::VectorXd r = problem.residuals(p);
  double cost = r.squaredNorm();
  if (!std::isfinite(cost)) throw FitError("levenberg_marquardt: non-finite residuals at start");
  double mu = 1e-3;

  for (int it = 1; it <= options.max_iterations; ++it) {
    const Eigen::MatrixXd J = problem.jacobian(p);
    const Eigen::MatrixXd A = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * r;
    if (cost == 0.0 || g.cwiseAbs().maxCoeff() <= 1e-300) return {p, A, cost, it};

    // parameters pinned on a bound with the gradient pointing outward stay put
    const Eigen::Index np = p.size();
    std::vector<Eigen::Index> free;
    for (Eigen::Index k = 0; k < np; ++k) {
      const bool pinned = (p[k] <= problem.lower[k] && g[k] > 0.0) || (p[k] >= problem.upper[k] && g[k] < 0.0);
      if (!pinned) free.push_back(k);
    }
    if (free.empty()) return {p, A, cost, it};
    const auto nf = static_cast<Eigen::Index>(free.size());
    Eigen::MatrixXd Af(nf, nf);
    Eigen::VectorXd gf(nf);
    for (Eigen::Index a = 0; a < nf; ++a) {
      gf[a] = g[free[a]];
      for (Eigen::Index b = 0; b < nf; ++b) Af(a, b) = A(free[a], free[b]);
    }

    bool accepted = false;
    while (mu < 1e20) {
      Eigen::MatrixXd damped = Af;
      damped.diagonal() += mu * Af.diagonal().cwiseMax(1e-12);
      const Eigen::VectorXd sf = damped.ldlt().solve(-gf);
      Eigen::VectorXd step = Eigen::VectorXd::Zero(np);
      for (Eigen::Index a = 0; a < nf; ++a) step[free[a]] = sf[a];
      const Eigen::VectorXd trial = clamp_to_box(p + step, problem);
      const Eigen::VectorXd r_trial = problem.residuals(trial);
      const double trial_cost = r_trial.squaredNorm();
      if (std::isfinite(trial_cost) && trial_cost <= cost) {
        const double moved = (trial - p).norm();
        const double improvement = cost - trial_cost;
        p = trial;
        r = r_trial;
        cost = trial_cost;
        mu = std::max(mu / 3.0, 1e-12);
        accepted = true;
        if (moved <= options.step_tolerance * (p.norm() + options.step_tolerance) ||
            improvement <= options.cost_tolerance * cost)
          return {p, problem.jacobian(p).transpose() * problem.jacobian(p), cost, it};
        break;
      }
      mu *= 4.0;
    }
    // No downhill step at any damping: p is a (constrained) minimum to
    // working precision.
    if (!accepted) return {p, A, cost, it};
  }
  throw FitError("levenberg_marquardt: no convergence after " + std::to_string(options.max_iterations) +
                 " iterations (cost " + std::to_string(cost) + ")");
}

/// (JᵀJ)⁺ via a symmetric eigendecomposition; directions with vanishing
/// curvature get zero variance rather than infinity.
inline Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
  const Eigen::VectorXd ev = solver.eigenvalues();
  const double cutoff = 1e-12 * ev.cwiseAbs().maxCoeff();
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(ev.size());
  for (Eigen::Index k = 0; k < ev.size(); ++k)
    if (ev[k] > cutoff) inv[k] = 1.0 / ev[k];
  return solver.eigenvectors() * inv.asDiagonal() * solver.eigenvectors().transpose();
}

}  // namespace qshaper
