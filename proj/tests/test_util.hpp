// SPDX-License-Identifier: MIT
#pragma once

#include <Eigen/Dense>
#include <climits>

#include "fsda/config.hpp"
#include "fsda/engine.hpp"
#include "fsda/factor.hpp"
#include "fsda/problem.hpp"
#include "fsda/reduction.hpp"

namespace fsda::test {

// Every threshold zero: products keep all entries, approximate inverses run
// to full bandwidth, compression removes exact rank deficiency only.  Under
// this config the structured recurrence tracks the dense one to rounding.
inline SolverConfig exact_config(int n) {
  SolverConfig cfg;
  cfg.tol = 0.0;
  cfg.tau_g = 0.0;
  cfg.tau_h = 0.0;
  cfg.tau_r = 0.0;
  cfg.band_drop = 0.0;
  cfg.max_bw = n - 1;
  cfg.m_max = INT_MAX;
  return cfg;
}

inline double rel_dev(const Eigen::MatrixXd& got, const Eigen::MatrixXd& want) {
  const double scale = want.norm();
  if (scale == 0.0) return got.norm();
  return (got - want).norm() / scale;
}

// One doubling step applied in place.  compress = false leaves the iterate
// in the raw deflated layout, which keeps the leading block of the H factor
// equal to the original right low-rank columns (the residual assembly can
// then deflate against them).
inline void advance(FsdaState& s, const SolverConfig& cfg,
                    bool compress = true) {
  const BandedStep bs = banded_step(s, cfg);
  const ThetaSet th = compute_thetas(s, bs.helpers);
  const KernelComponents kc = kernel_components(s, th);
  s = assemble_next(s, bs, kc);
  if (compress) {
    apply_ptc(s, cfg);
    monitor_prune(s, cfg);
  }
}

inline Eigen::MatrixXd recon_a(const FsdaState& s) {
  return reconstruct(s.dA, s.lA1, s.kA.data(), s.lA2);
}
inline Eigen::MatrixXd recon_g(const FsdaState& s) {
  return reconstruct(s.dG, s.lG, s.kG.data());
}
inline Eigen::MatrixXd recon_h(const FsdaState& s) {
  return reconstruct(s.dH, s.lH, s.kH.data());
}

}  // namespace fsda::test
