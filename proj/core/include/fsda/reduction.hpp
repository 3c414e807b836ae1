// SPDX-License-Identifier: MIT
#pragma once

#include <Eigen/Dense>

#include "fsda/config.hpp"
#include "fsda/engine.hpp"

namespace fsda {

/// Result of a rank-revealing compression of one factor block.  The block
/// (in its original column order) is approximated by q * u with q having
/// orthonormal columns; whatever the cut discarded has spectral norm
/// discarded_norm.
struct PtcOutcome {
  Eigen::MatrixXd q;  // n x rank, orthonormal columns
  Eigen::MatrixXd u;  // rank x m, so q * u approximates the input block
  int rank = 0;
  double discarded_norm = 0.0;
  double tau = 0.0;
  bool hard_cut = false;  // the m_max cap, not tau, decided the rank
};

/// Column-pivoted QR truncation: keeps the leading columns whose R diagonal
/// (nonincreasing by pivoting) stays above tau * |R(0,0)|, capped at m_max.
/// tau = 0 discards only exact rank deficiency.
PtcOutcome ptc_qr(const Eigen::MatrixXd& block, double tau, int m_max);

/// What apply_ptc did to each side.
struct PtcApplication {
  int rank_g = 0;
  int rank_h = 0;
  double discarded_g = 0.0;
  double discarded_h = 0.0;
  bool hard_cut_g = false;
  bool hard_cut_h = false;
};

/// Compresses the growing middle segments: the G2 block of lG is replaced
/// by its orthonormal basis q (the same matrix is written into lA1, keeping
/// the two ledgers bitwise equal where they share columns), the discarded
/// mixing u is folded into the kernels as a congruence, and the same
/// happens on the H side.  Updates rank_g / rank_h.
PtcApplication apply_ptc(FsdaState& s, const SolverConfig& cfg);

/// Trailing-segment monitor outcome.  A deleted A1/A2 tail never comes
/// back (the chain that generates the next G3/H3 is cut); a deleted G3/H3
/// reappears one iteration later as long as the matching tail is alive.
struct MonitorReport {
  bool deleted_g3 = false;
  bool deleted_h3 = false;
  bool deleted_a1_tail = false;
  bool deleted_a2_tail = false;
};

/// Deletes trailing segments whose Frobenius norm fell below the
/// compression thresholds (tau_g for the G-side blocks, tau_h for the H
/// side), zeroes entries below cfg.tol in the settled head segments, and
/// prunes the banded parts at cfg.tol.
MonitorReport monitor_prune(FsdaState& s, const SolverConfig& cfg);

}  // namespace fsda
