// SPDX-License-Identifier: MIT
#pragma once

#include <string>
#include <vector>

#include "fsda/config.hpp"
#include "fsda/cost.hpp"
#include "fsda/engine.hpp"
#include "fsda/problem.hpp"
#include "fsda/residual.hpp"

namespace fsda {

/// Stages in the order the solve visits them; the call log records one
/// entry per stage execution so tests can audit the control flow (most
/// importantly: no low-rank residual without a banded residual having
/// passed its gate first at the same iterate).
enum class StageEvent {
  kInit,
  kBandedResidual,
  kLowRankResidual,
  kBandedStep,
  kThetas,
  kKernels,
  kAssemble,
  kPtc,
  kMonitor,
};

const char* to_string(StageEvent e);

struct CallLogEntry {
  StageEvent stage = StageEvent::kInit;
  int k = 0;
  double value = 0.0;  // residual stages record their indicator here
};

/// Everything observable about one iterate: indicators, factor widths,
/// bandwidths, compression ranks, monitor deletions, and wall time since
/// the previous report.
struct ResidualReport {
  int k = 0;
  double b_rres = 0.0;
  bool has_lr = false;
  double lr_rres = 0.0;
  int mg = 0, mh = 0, ma1 = 0, ma2 = 0;
  int bw_a = 0, bw_g = 0, bw_h = 0;
  int rank_g = 0, rank_h = 0;
  double elapsed_s = 0.0;
  bool deleted_g3 = false, deleted_h3 = false;
  bool deleted_a1_tail = false, deleted_a2_tail = false;
};

enum class SolveStatus { kConverged, kMaxIterations, kBreakdown };

const char* to_string(SolveStatus s);

struct Solution {
  SolveStatus status = SolveStatus::kMaxIterations;
  int n = 0;
  int k_final = 0;
  // The approximate stabilizing solution X ~ dH + lH * kH * lH^T.
  BandedMatrix dH;
  TallFactor lH;
  BlockKernel kH;
  std::vector<ResidualReport> history;
  std::vector<CallLogEntry> call_log;
  std::string breakdown_detail;
  cost::Tally tally;
};

/// Runs the structured doubling iteration until the two-stage residual test
/// passes (kConverged), max_iter is reached (kMaxIterations, best iterate
/// returned), or a singular middle system stops the recurrence
/// (kBreakdown).  cfg.speculative evaluates each iterate's residual
/// concurrently with the next banded step; results are bitwise identical,
/// only the wall clock and the cost attribution of the overlapped residual
/// work change (the worker thread's counts are not collected).
Solution solve(const DareProblem& p, const SolverConfig& cfg);

/// One row per iterate:
///   k,B_RRes,LR_RRes,mg,mh,ma1,ma2,bw_a,bw_g,bw_h,elapsed_s
/// (LR_RRes is empty until that stage ran).
void write_trace_csv(const Solution& sol, const std::string& path);

/// One row per iteration of the cost tally joined with the width history:
/// operation counts per bucket plus the a-priori factor-product bound
/// 4 N b (mg + mh + max(ma1, ma2)) evaluated at the previous iterate.
void write_cost_csv(const Solution& sol, const std::string& path);

}  // namespace fsda
