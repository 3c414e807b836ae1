// SPDX-License-Identifier: MIT
#pragma once

#include <algorithm>
#include <string>

namespace fsda {

/// Which norm appears inside the denominator term of the banded residual
/// indicator.  kVerbatim uses ||I + D^H_0 D^H_k||; kGH substitutes D^G_0 for
/// the inner D^H_0, which mirrors the (I + G X)^-1 factor of the Riccati
/// operator.  Both are reasonable scalings; verbatim is the default.
enum class DenominatorMode { kVerbatim, kGH };

/// Solver tuning knobs.  Thresholds cleanly separate into three families:
///   - band_drop / tol: what counts as numerically zero in banded parts,
///   - tau_g / tau_h / tau_r / m_max: low-rank compression aggressiveness,
///   - eps_b / eps_l: the two-stage termination test.
struct SolverConfig {
  // Entry prune threshold applied to the banded iterates once per
  // iteration.  Zero keeps everything.
  double tol = 1e-15;
  // Compression thresholds for the growing middle segments of the G and H
  // factors, also used by the trailing-segment monitor.
  double tau_g = 1e-12;
  double tau_h = 1e-12;
  // Compression threshold for the residual factor.
  double tau_r = 1e-14;
  // Stage one: banded residual must drop below eps_b before the low-rank
  // residual is ever formed.  Stage two: stop when it is below eps_l.
  double eps_b = 1e-10;
  double eps_l = 1e-10;
  // Hard cap on the compressed segment rank; -1 means 40 * m^a.
  int m_max = -1;
  int max_iter = 30;
  // Drop tolerance inside banded products and approximate inverses.
  double band_drop = 1e-15;
  // Bandwidth cap for approximate inverses; -1 means
  // min(n - 1, 8 * max initial bandwidth).
  int max_bw = -1;
  DenominatorMode denominator = DenominatorMode::kVerbatim;
  // Evaluate the residual of iterate k concurrently with the banded part of
  // the advance to k+1.  Results are identical; only wall time changes.
  bool speculative = false;

  void validate() const;
  int resolve_m_max(int ma) const {
    if (m_max >= 0) return m_max;
    return ma > 0 ? 40 * ma : 0;
  }
  int resolve_max_bw(int n, int max_initial_bw) const {
    const int cap = std::max(0, n - 1);
    if (max_bw >= 0) return std::min(max_bw, cap);
    return std::min(cap, 8 * std::max(1, max_initial_bw));
  }
};

/// Plain key=value config file (one pair per line, '#' comments).  Keys
/// match the SolverConfig field names; `denominator` takes "verbatim" or
/// "GH".  Unknown keys are an error so typos do not silently fall back to
/// defaults.
SolverConfig read_config(const std::string& path);
void write_config(const SolverConfig& cfg, const std::string& path);

}  // namespace fsda
