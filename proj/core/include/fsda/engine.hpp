// SPDX-License-Identifier: MIT
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fsda/banded.hpp"
#include "fsda/config.hpp"
#include "fsda/factor.hpp"
#include "fsda/problem.hpp"

namespace fsda {

/// Iterate k of the structured doubling recurrence:
///   A_k = dA + lA1 * kA * lA2^T
///   G_k = dG + lG * kG * lG^T      (symmetric)
///   H_k = dH + lH * kH * lH^T      (symmetric)
/// The factor ledgers drive deflation: the G2/H2 middle segments are the
/// only ones that grow (and get compressed), G3/H3 tails become next
/// iteration's head blocks, and lA1/lA2 share their leading block with the
/// corresponding middle segment.
struct FsdaState {
  int k = 0;
  int ma = 0;      // columns of the original low-rank input
  int max_bw = 0;  // resolved bandwidth cap for approximate inverses
  BandedMatrix dA, dG, dH;
  TallFactor lG, lH, lA1, lA2;
  BlockKernel kG, kH, kA;
  // Width of the latest compressed middle segment (r^g_k, r^h_k); equals
  // the G2/H2 ledger width right after compression.
  int rank_g = 0;
  int rank_h = 0;

  int mg() const { return lG.cols(); }
  int mh() const { return lH.cols(); }
  int ma1() const { return lA1.cols(); }
  int ma2() const { return lA2.cols(); }
  /// Ledger/kernel consistency; throws FsdaError on violation.
  void check() const;
};

/// Helper products plus the banded parts of the next iterate:
///   dA_next = agh * dA,  dG_next = dG + aghg * dA^T,
///   dH_next = dH + athgh * dA.
struct BandedStep {
  HelperSet helpers;
  BandedMatrix dA_next, dG_next, dH_next;
  BandInvDiag inv_diag;
};

/// The ten small Gram matrices coupling the factors through the helper
/// bands; all are m x m for the current factor widths.
struct ThetaSet {
  Eigen::MatrixXd h;    // lH^T ghg lH
  Eigen::MatrixXd g;    // lG^T hgh lG
  Eigen::MatrixXd hg;   // lH^T gh lG
  Eigen::MatrixXd a;    // lA2^T gh lA1
  Eigen::MatrixXd a1;   // lA1^T hgh lA1
  Eigen::MatrixXd a2;   // lA2^T ghg lA2
  Eigen::MatrixXd ah1;  // lA1^T hg lH
  Eigen::MatrixXd ag1;  // lA1^T hgh lG
  Eigen::MatrixXd ah2;  // lA2^T ghg lH
  Eigen::MatrixXd ag2;  // lA2^T gh lG
};

/// Kernel-space images of the coupled middle inverses.  gh solves the small
/// system that captures (I + G_k H_k)^-1 acting between the factors; the
/// rest are the products the next iterate's kernels are tiled from.
struct KernelComponents {
  Eigen::MatrixXd gh;      // rows (mg, mh), cols (mh, mg)
  Eigen::MatrixXd ghg;     // rows (mg, mh), cols (mg, mh)
  Eigen::MatrixXd hgh;     // rows (mh, mg), cols (mh, mg)
  Eigen::MatrixXd aghg;    // ma1 x (mg + mh)
  Eigen::MatrixXd athgh;   // ma2 x (mh + mg)
  Eigen::MatrixXd aghga;   // ma1 x ma1, symmetric
  Eigen::MatrixXd athgha;  // ma2 x ma2, symmetric
  Eigen::MatrixXd agh;     // ma1 x (mh + mg)
  Eigen::MatrixXd atgh;    // ma2 x (mg + mh)
  Eigen::MatrixXd agha;    // ma1 x ma2
};

/// Iterate k = 1 from the problem data (one doubling step applied to the
/// inputs, with the low-rank structure split off exactly).
FsdaState init_state(const DareProblem& p, const SolverConfig& cfg);

/// Helpers and banded next parts for the advance from s.k to s.k + 1.
BandedStep banded_step(const FsdaState& s, const SolverConfig& cfg);

ThetaSet compute_thetas(const FsdaState& s, const HelperSet& helpers);

/// Throws BreakdownError when the coupled middle system is singular.
KernelComponents kernel_components(const FsdaState& s, const ThetaSet& th);

/// Advances the factors and kernels directly in deflated layout: shared
/// blocks are written once, the kernels are assembled in full (they are
/// small) and their duplicate rows/columns are summed away.  Returns the
/// iterate at k + 1, before compression.
FsdaState assemble_next(const FsdaState& s, const BandedStep& bs,
                        const KernelComponents& kc);

/// Test oracle: the same advance without any deflation, together with the
/// column moves whose merge turns it into the deflated layout.  Factor
/// segments are cut fine enough that every move covers whole segments.
struct UndeflatedAdvance {
  TallFactor lG, lH, lA1, lA2;
  BlockKernel kG, kH, kA;
  std::vector<ColMove> g_moves;        // rows and cols of kG, cols of lG
  std::vector<ColMove> h_moves;        // rows and cols of kH, cols of lH
  std::vector<ColMove> a1_row_moves;   // rows of kA, cols of lA1
  std::vector<ColMove> a2_col_moves;   // cols of kA, cols of lA2
};
UndeflatedAdvance assemble_next_undeflated(const FsdaState& s,
                                           const BandedStep& bs,
                                           const KernelComponents& kc);

}  // namespace fsda
