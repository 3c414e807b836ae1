// SPDX-License-Identifier: MIT
#include <Eigen/Dense>
#include <cmath>
#include <doctest.h>

#include "fsda/dense_oracle.hpp"
#include "fsda/errors.hpp"
#include "fsda/problem.hpp"

using namespace fsda;

TEST_CASE("scalar equation against the closed form") {
  // x = a x (1 + g x)^-1 a + h with a = 0.5, g = h = 1 reduces to
  // x^2 - 0.25 x - 1 = 0, whose positive root is the stabilizing solution.
  Eigen::MatrixXd a(1, 1), g(1, 1), h(1, 1);
  a << 0.5;
  g << 1.0;
  h << 1.0;
  const double x_star = (0.25 + std::sqrt(0.0625 + 4.0)) / 2.0;

  const DenseIterates it = dense_sda(a, g, h, 8);
  CHECK(it.steps() == 8);
  CHECK(it.h.back()(0, 0) == doctest::Approx(x_star).epsilon(1e-14));
  CHECK(dare_residual(it.h.back(), a, g, h) <= 1e-14);
}

TEST_CASE("iterates of a generated instance behave as the theory says") {
  const DareProblem p = gen_instance(24, 2, 2, 0.6, 321);
  const Eigen::MatrixXd a0 = p.dense_a();
  const Eigen::MatrixXd g0 = p.dG0.dense();
  const Eigen::MatrixXd h0 = p.dH0.dense();
  const DenseIterates it = dense_sda(a0, g0, h0, 7);

  // H_k is monotonically nondecreasing in the Loewner order.
  for (int k = 0; k + 1 <= it.steps(); ++k) {
    const Eigen::MatrixXd diff = it.h[k + 1] - it.h[k];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(diff);
    CHECK(es.eigenvalues().minCoeff() >= -1e-12 * (1.0 + it.h[k + 1].norm()));
  }

  // ||A_k|| collapses quadratically once it is below one.
  CHECK(it.a[7].norm() <= 1e-12 * std::max(1.0, it.a[1].norm()));

  // The limits solve the primal and the dual equation.
  const double hscale = it.h.back().norm();
  CHECK(dare_residual(it.h.back(), a0, g0, h0) <= 1e-11 * hscale);
  const double gscale = it.g.back().norm();
  CHECK(dare_residual(it.g.back(), a0.transpose(), h0, g0) <= 1e-11 * gscale);
}

TEST_CASE("residual operator matches a direct evaluation") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Random(6, 6) * 0.3;
  Eigen::MatrixXd g = Eigen::MatrixXd::Identity(6, 6);
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(6, 6) * 2.0;
  Eigen::MatrixXd x = Eigen::MatrixXd::Identity(6, 6);
  const Eigen::MatrixXd want =
      -x + a.transpose() * x * (Eigen::MatrixXd::Identity(6, 6) + g * x).inverse() * a + h;
  CHECK((dare_residual_matrix(x, a, g, h) - want).norm() <= 1e-13 * want.norm());
  CHECK(dare_residual(x, a, g, h) == doctest::Approx(want.norm()));
}

TEST_CASE("spectral radius of a known matrix") {
  Eigen::MatrixXd m(2, 2);
  m << 0.0, 1.0, -0.25, 0.0;  // eigenvalues +-0.5i
  CHECK(spectral_radius(m) == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("convergence report certifies the closed loop") {
  const DareProblem p = gen_instance(20, 1, 1, 0.5, 77);
  const Eigen::MatrixXd a0 = p.dense_a();
  const Eigen::MatrixXd g0 = p.dG0.dense();
  const Eigen::MatrixXd h0 = p.dH0.dense();
  const ConvergenceReport r = convergence_report(a0, g0, h0);
  CHECK(r.converged());
  CHECK(r.rho_s < 1.0);
  CHECK(r.rho_t < 1.0);

  // X from the report is the doubling limit, and rho_s is the radius of the
  // closed-loop matrix it induces.
  const Eigen::MatrixXd s =
      (Eigen::MatrixXd::Identity(20, 20) + g0 * r.x).inverse() * a0;
  CHECK(spectral_radius(s) == doctest::Approx(r.rho_s).epsilon(1e-8));
  CHECK(dare_residual(r.x, a0, g0, h0) <= 1e-11 * r.x.norm());
}

TEST_CASE("the dense oracle refuses beyond desk scale") {
  const int n = 300;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd g = Eigen::MatrixXd::Identity(n, n);
  CHECK_THROWS_AS(convergence_report(a, g, g), FsdaError);
}
