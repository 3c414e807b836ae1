// SPDX-License-Identifier: MIT
#pragma once

#include <cstdint>
#include <string>

#include "fsda/banded.hpp"
#include "fsda/factor.hpp"

namespace fsda {

struct ProblemMeta {
  int n = 0;
  int band = 0;
  int m_a = 0;
  std::uint64_t seed = 0;
  double rho_target = 0.0;
};

/// One equation instance
///   X = A^T X (I + G X)^-1 A + H
/// with banded-plus-low-rank A = dA0 + lA10 * lA20^T (the mixing kernel is
/// normalized into lA20) and purely banded symmetric G = dG0, H = dH0.
struct DareProblem {
  BandedMatrix dA0, dG0, dH0;
  TallFactor lA10, lA20;
  ProblemMeta meta;

  int n() const { return dA0.n(); }
  /// Dense A (desk scale), for oracles and validation.
  Eigen::MatrixXd dense_a() const;
  void check() const;
};

struct GenReport {
  int attempts = 0;
  double rho_s = 0.0;
  double rho_t = 0.0;
  // Dense validation runs only at desk scale (n <= 256); above that the
  // instance is emitted with validated = false.
  bool validated = false;
};

/// Deterministic instance generator: a fixed seed yields a bitwise
/// identical problem.  dA0 is a random band scaled so its spectral radius
/// is close to rho_target; the low-rank columns have unit direction and
/// norm 0.1; dG0 and dH0 are positive definite bands built as B * B^T from
/// a lower-triangular half-band factor.  Candidates whose closed-loop
/// spectral radii are not both below one are re-drawn (up to ten attempts,
/// then FsdaError).
DareProblem gen_instance(int n, int band, int m_a, double rho_target,
                         std::uint64_t seed, GenReport* report = nullptr);

/// Problem bundle directory:
///   meta      key=value text (n, band, m_a, seed, rho_target)
///   DA.mtx    Matrix Market, banded part of A
///   DG.mtx    Matrix Market, G (written symmetric)
///   DH.mtx    Matrix Market, H (written symmetric)
///   LA1.talf  left low-rank factor
///   LA2.talf  right low-rank factor
/// Values round-trip bitwise.
void write_bundle(const DareProblem& p, const std::string& dir);
DareProblem read_bundle(const std::string& dir);

}  // namespace fsda
