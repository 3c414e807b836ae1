// SPDX-License-Identifier: MIT
#include "fsda/dense_oracle.hpp"

#include <cassert>

#include "fsda/errors.hpp"

namespace fsda {

DenseIterates dense_sda(const Eigen::MatrixXd& a0, const Eigen::MatrixXd& g0,
                        const Eigen::MatrixXd& h0, int k_max) {
  const auto n = a0.rows();
  assert(a0.cols() == n && g0.rows() == n && g0.cols() == n &&
         h0.rows() == n && h0.cols() == n);
  DenseIterates it;
  it.a.push_back(a0);
  it.g.push_back((g0 + g0.transpose()) / 2.0);
  it.h.push_back((h0 + h0.transpose()) / 2.0);
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  for (int k = 0; k < k_max; ++k) {
    const Eigen::MatrixXd& a = it.a.back();
    const Eigen::MatrixXd& g = it.g.back();
    const Eigen::MatrixXd& h = it.h.back();
    const Eigen::PartialPivLU<Eigen::MatrixXd> w((eye + g * h).eval());
    // (I + G H)^-1 applied once per occurrence; G and H stay symmetric in
    // exact arithmetic, and we re-symmetrize to keep roundoff from drifting.
    const Eigen::MatrixXd wia = w.solve(a);
    Eigen::MatrixXd g_next = g + a * w.solve(g * a.transpose());
    Eigen::MatrixXd h_next = h + a.transpose() * (h * wia);
    it.a.push_back(a * wia);
    it.g.push_back((g_next + g_next.transpose()) / 2.0);
    it.h.push_back((h_next + h_next.transpose()) / 2.0);
  }
  return it;
}

Eigen::MatrixXd dare_residual_matrix(const Eigen::MatrixXd& x,
                                     const Eigen::MatrixXd& a,
                                     const Eigen::MatrixXd& g,
                                     const Eigen::MatrixXd& h) {
  const auto n = x.rows();
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  const Eigen::PartialPivLU<Eigen::MatrixXd> w((eye + g * x).eval());
  return -x + a.transpose() * x * w.solve(a) + h;
}

double dare_residual(const Eigen::MatrixXd& x, const Eigen::MatrixXd& a,
                     const Eigen::MatrixXd& g, const Eigen::MatrixXd& h) {
  return dare_residual_matrix(x, a, g, h).norm();
}

double spectral_radius(const Eigen::MatrixXd& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

namespace {

/// Runs the dense recurrence until the H iterate stalls; returns the limit
/// and the number of steps taken.
std::pair<Eigen::MatrixXd, int> dense_limit(const Eigen::MatrixXd& a,
                                            const Eigen::MatrixXd& g,
                                            const Eigen::MatrixXd& h,
                                            int max_steps, double tol) {
  DenseIterates it = dense_sda(a, g, h, 0);
  for (int k = 0; k < max_steps; ++k) {
    DenseIterates next =
        dense_sda(it.a.back(), it.g.back(), it.h.back(), 1);
    const double delta = (next.h.back() - it.h.back()).norm();
    it.a.back() = next.a.back();
    it.g.back() = next.g.back();
    it.h.back() = next.h.back();
    if (delta <= tol * std::max(1.0, it.h.back().norm())) {
      return {it.h.back(), k + 1};
    }
  }
  return {it.h.back(), max_steps};
}

}  // namespace

ConvergenceReport convergence_report(const Eigen::MatrixXd& a,
                                     const Eigen::MatrixXd& g,
                                     const Eigen::MatrixXd& h, int max_steps,
                                     double tol) {
  const auto n = a.rows();
  if (n > 256) {
    throw FsdaError("convergence_report is a desk-scale oracle (n <= 256)");
  }
  ConvergenceReport report;
  auto [x, kx] = dense_limit(a, g, h, max_steps, tol);
  // The dual equation is the same recurrence with A^T and the roles of G
  // and H exchanged; its H-limit is Y.
  auto [y, ky] = dense_limit(a.transpose(), h, g, max_steps, tol);
  report.x = std::move(x);
  report.y = std::move(y);
  report.iterations_x = kx;
  report.iterations_y = ky;
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd s =
      Eigen::PartialPivLU<Eigen::MatrixXd>((eye + g * report.x).eval())
          .solve(a);
  const Eigen::MatrixXd t =
      Eigen::PartialPivLU<Eigen::MatrixXd>((eye + h * report.y).eval())
          .solve(a.transpose());
  report.rho_s = spectral_radius(s);
  report.rho_t = spectral_radius(t);
  return report;
}

}  // namespace fsda
