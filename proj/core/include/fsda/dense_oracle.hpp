// SPDX-License-Identifier: MIT
#pragma once

#include <Eigen/Dense>
#include <vector>

namespace fsda {

/// Dense doubling iterates, index k = 0 holding the inputs.  Desk-scale
/// reference implementation: everything is materialized, nothing is
/// truncated, so these values arbitrate the structured solver.
struct DenseIterates {
  std::vector<Eigen::MatrixXd> a, g, h;
  int steps() const { return static_cast<int>(a.size()) - 1; }
};

/// Runs k_max steps of the dense doubling recurrence
///   A_{k+1} = A_k (I + G_k H_k)^-1 A_k
///   G_{k+1} = G_k + A_k (I + G_k H_k)^-1 G_k A_k^T
///   H_{k+1} = H_k + A_k^T H_k (I + G_k H_k)^-1 A_k
/// symmetrizing G and H after every step.  H_k increases monotonically to
/// the stabilizing solution X of
///   X = A^T X (I + G X)^-1 A + H,
/// and G_k to the solution Y of the dual equation with A^T and G, H swapped.
DenseIterates dense_sda(const Eigen::MatrixXd& a0, const Eigen::MatrixXd& g0,
                        const Eigen::MatrixXd& h0, int k_max);

/// The Riccati operator residual -X + A^T X (I + G X)^-1 A + H.
Eigen::MatrixXd dare_residual_matrix(const Eigen::MatrixXd& x,
                                     const Eigen::MatrixXd& a,
                                     const Eigen::MatrixXd& g,
                                     const Eigen::MatrixXd& h);

/// Frobenius norm of dare_residual_matrix.
double dare_residual(const Eigen::MatrixXd& x, const Eigen::MatrixXd& a,
                     const Eigen::MatrixXd& g, const Eigen::MatrixXd& h);

double spectral_radius(const Eigen::MatrixXd& m);

/// Stability certificate for a problem instance.  X and Y are the primal
/// and dual solutions from the dense recurrence; S = (I + G X)^-1 A and
/// T = (I + H Y)^-1 A^T are the closed-loop matrices whose spectral radii
/// must be below one for the doubling iteration to converge quadratically.
struct ConvergenceReport {
  Eigen::MatrixXd x, y;
  double rho_s = 0.0;
  double rho_t = 0.0;
  int iterations_x = 0;
  int iterations_y = 0;
  bool converged() const { return rho_s < 1.0 && rho_t < 1.0; }
};

/// Refuses n > 256 (this is a desk-scale oracle; the dense eigensolves and
/// the stored iterates scale cubically).
ConvergenceReport convergence_report(const Eigen::MatrixXd& a,
                                     const Eigen::MatrixXd& g,
                                     const Eigen::MatrixXd& h,
                                     int max_steps = 60, double tol = 1e-14);

}  // namespace fsda
