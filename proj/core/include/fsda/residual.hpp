// SPDX-License-Identifier: MIT
#pragma once

#include <Eigen/Dense>

#include "fsda/banded.hpp"
#include "fsda/config.hpp"
#include "fsda/engine.hpp"
#include "fsda/problem.hpp"

namespace fsda {

/// Banded pieces shared by both residual indicators at one iterate:
///   hg  ~ (I + dH_k dG_0)^-1
///   hgh = hg * dH_k   (equals dH_k (I + dG_0 dH_k)^-1)
///   ghg = dG_0 * hg
/// built with the configured drop tolerance and bandwidth cap, so they are
/// approximations whose quality diag reports.
struct TildeCache {
  BandedMatrix hg, hgh, ghg;
  BandInvDiag diag;
};

TildeCache make_tilde(const DareProblem& p, const FsdaState& s,
                      const SolverConfig& cfg);

/// Stage one: the banded parts evolve as a doubling recurrence of their
/// own, so dr = dH_0 - dH_k + dA_0^T hgh dA_0 is the residual of that
/// banded subproblem and vanishes as fast as the full residual.  b_rres is
/// ||dr||_F over the scale
///   ||dH_0|| + ||dH_k|| + ||dA_0||^2 ||dH_k|| / ||I + D dH_k||
/// with D = dH_0 (verbatim mode) or D = dG_0.
struct BandedResidual {
  double b_rres = 0.0;
  BandedMatrix dr;
};

BandedResidual banded_residual(const DareProblem& p, const FsdaState& s,
                               const TildeCache& t, const SolverConfig& cfg);

/// Stage two: the full Riccati residual at iterate k is dr plus an explicit
/// low-rank part lr * kr * lr^T assembled here.  When the leading columns
/// of the H factor still equal the original right low-rank block, that
/// duplicate column block is merged away first (deflated = true).  lr_rres
/// compresses lr by rank-revealing QR at tau_r and scales the kernel's
/// contribution by the factor mass:
///   ||u kr u^T||_F / (||u||_F^2 ||kr||_F).
struct LowRankResidual {
  double lr_rres = 0.0;
  bool deflated = false;
  int rank = 0;
  TallFactor lr;
  Eigen::MatrixXd kr;
};

LowRankResidual lowrank_residual(const DareProblem& p, const FsdaState& s,
                                 const TildeCache& t, const SolverConfig& cfg);

}  // namespace fsda
