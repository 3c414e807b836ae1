// SPDX-License-Identifier: MIT
#include "fsda/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <future>
#include <optional>

#include "fsda/errors.hpp"
#include "fsda/reduction.hpp"

namespace fsda {

const char* to_string(StageEvent e) {
  switch (e) {
    case StageEvent::kInit: return "init";
    case StageEvent::kBandedResidual: return "banded_residual";
    case StageEvent::kLowRankResidual: return "lowrank_residual";
    case StageEvent::kBandedStep: return "banded_step";
    case StageEvent::kThetas: return "thetas";
    case StageEvent::kKernels: return "kernels";
    case StageEvent::kAssemble: return "assemble";
    case StageEvent::kPtc: return "ptc";
    case StageEvent::kMonitor: return "monitor";
  }
  return "?";
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kConverged: return "converged";
    case SolveStatus::kMaxIterations: return "max_iterations";
    case SolveStatus::kBreakdown: return "breakdown";
  }
  return "?";
}

namespace {

struct ResidualBundle {
  BandedResidual br;
  LowRankResidual lr;
  bool has_lr = false;
};

ResidualBundle evaluate_residuals(const DareProblem& p, const FsdaState& s,
                                  const SolverConfig& cfg) {
  ResidualBundle rb;
  const TildeCache t = make_tilde(p, s, cfg);
  rb.br = banded_residual(p, s, t, cfg);
  if (rb.br.b_rres <= cfg.eps_b) {
    rb.lr = lowrank_residual(p, s, t, cfg);
    rb.has_lr = true;
  }
  return rb;
}

}  // namespace

Solution solve(const DareProblem& p, const SolverConfig& cfg) {
  cfg.validate();
  p.check();
  using clock = std::chrono::steady_clock;

  Solution sol;
  sol.n = p.n();
  cost::CostScope scope(&sol.tally);
  const auto log = [&sol](StageEvent e, int k, double value = 0.0) {
    sol.call_log.push_back({e, k, value});
  };

  FsdaState state;
  MonitorReport pending_monitor;
  auto iter_start = clock::now();
  try {
    cost::begin_iteration(1);
    state = init_state(p, cfg);
    log(StageEvent::kInit, 1);

    for (;;) {
      const bool can_advance = state.k < cfg.max_iter;
      ResidualBundle rb;
      std::optional<BandedStep> bs;
      if (cfg.speculative && can_advance) {
        // The residual of iterate k only reads state, so it can overlap
        // the banded half of the advance.  The worker thread has no cost
        // tally installed, so the overlapped residual goes uncounted.
        cost::begin_iteration(state.k + 1);
        auto fut = std::async(std::launch::async, evaluate_residuals,
                              std::cref(p), std::cref(state), std::cref(cfg));
        bs = banded_step(state, cfg);
        rb = fut.get();
      } else {
        rb = evaluate_residuals(p, state, cfg);
      }

      log(StageEvent::kBandedResidual, state.k, rb.br.b_rres);
      if (rb.has_lr) {
        log(StageEvent::kLowRankResidual, state.k, rb.lr.lr_rres);
      }

      ResidualReport rep;
      rep.k = state.k;
      rep.b_rres = rb.br.b_rres;
      rep.has_lr = rb.has_lr;
      rep.lr_rres = rb.has_lr ? rb.lr.lr_rres : 0.0;
      rep.mg = state.mg();
      rep.mh = state.mh();
      rep.ma1 = state.ma1();
      rep.ma2 = state.ma2();
      rep.bw_a = state.dA.half_bw();
      rep.bw_g = state.dG.half_bw();
      rep.bw_h = state.dH.half_bw();
      rep.rank_g = state.rank_g;
      rep.rank_h = state.rank_h;
      rep.deleted_g3 = pending_monitor.deleted_g3;
      rep.deleted_h3 = pending_monitor.deleted_h3;
      rep.deleted_a1_tail = pending_monitor.deleted_a1_tail;
      rep.deleted_a2_tail = pending_monitor.deleted_a2_tail;
      const auto now = clock::now();
      rep.elapsed_s = std::chrono::duration<double>(now - iter_start).count();
      iter_start = now;
      sol.history.push_back(rep);
      pending_monitor = MonitorReport{};

      if (rb.has_lr && rb.lr.lr_rres <= cfg.eps_l) {
        sol.status = SolveStatus::kConverged;
        break;
      }
      if (!can_advance) {
        sol.status = SolveStatus::kMaxIterations;
        break;
      }

      if (!bs) {
        cost::begin_iteration(state.k + 1);
        bs = banded_step(state, cfg);
      }
      log(StageEvent::kBandedStep, state.k);
      const ThetaSet th = compute_thetas(state, bs->helpers);
      log(StageEvent::kThetas, state.k);
      const KernelComponents kc = kernel_components(state, th);
      log(StageEvent::kKernels, state.k);
      state = assemble_next(state, *bs, kc);
      log(StageEvent::kAssemble, state.k);
      apply_ptc(state, cfg);
      log(StageEvent::kPtc, state.k);
      pending_monitor = monitor_prune(state, cfg);
      log(StageEvent::kMonitor, state.k);
    }
  } catch (const FsdaError& e) {
    sol.status = SolveStatus::kBreakdown;
    sol.breakdown_detail = e.what();
  }

  sol.k_final = state.k;
  sol.dH = state.dH;
  sol.lH = state.lH;
  sol.kH = state.kH;
  return sol;
}

namespace {

class CsvFile {
 public:
  explicit CsvFile(const std::string& path)
      : f_(std::fopen(path.c_str(), "w")) {
    if (f_ == nullptr) {
      throw FsdaError("cannot open '" + path + "' for writing");
    }
  }
  ~CsvFile() {
    if (f_ != nullptr) std::fclose(f_);
  }
  void line(const std::string& s) { std::fprintf(f_, "%s\n", s.c_str()); }

 private:
  std::FILE* f_;
};

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_trace_csv(const Solution& sol, const std::string& path) {
  CsvFile csv(path);
  csv.line("k,B_RRes,LR_RRes,mg,mh,ma1,ma2,bw_a,bw_g,bw_h,elapsed_s");
  for (const ResidualReport& r : sol.history) {
    std::string row = std::to_string(r.k) + "," + fmt_double(r.b_rres) + ",";
    if (r.has_lr) row += fmt_double(r.lr_rres);
    row += "," + std::to_string(r.mg) + "," + std::to_string(r.mh) + "," +
           std::to_string(r.ma1) + "," + std::to_string(r.ma2) + "," +
           std::to_string(r.bw_a) + "," + std::to_string(r.bw_g) + "," +
           std::to_string(r.bw_h) + "," + fmt_double(r.elapsed_s);
    csv.line(row);
  }
}

void write_cost_csv(const Solution& sol, const std::string& path) {
  CsvFile csv(path);
  csv.line(
      "k,band_mul_macs,factor_product_macs,kernel_macs,qr_macs,"
      "residual_macs,peak_factor_values,factor_product_bound");
  for (const cost::IterCost& c : sol.tally.iterations) {
    std::string row = std::to_string(c.k) + "," +
                      std::to_string(c.band_mul_macs) + "," +
                      std::to_string(c.factor_product_macs) + "," +
                      std::to_string(c.kernel_macs) + "," +
                      std::to_string(c.qr_macs) + "," +
                      std::to_string(c.residual_macs) + "," +
                      std::to_string(c.peak_factor_values) + ",";
    // Bound for the advance into iterate k, in terms of the previous
    // iterate's widths and bandwidths.
    const ResidualReport* prev = nullptr;
    for (const ResidualReport& r : sol.history) {
      if (r.k == c.k - 1) prev = &r;
    }
    if (prev != nullptr) {
      const std::int64_t b = std::max({prev->bw_a, prev->bw_g, prev->bw_h});
      const std::int64_t width =
          prev->mg + prev->mh + std::max(prev->ma1, prev->ma2);
      row += std::to_string(4 * static_cast<std::int64_t>(sol.n) * b * width);
    }
    csv.line(row);
  }
}

}  // namespace fsda
