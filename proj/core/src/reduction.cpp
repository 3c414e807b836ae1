// SPDX-License-Identifier: MIT
#include "fsda/reduction.hpp"

#include <algorithm>
#include <vector>

#include "fsda/cost.hpp"
#include "fsda/errors.hpp"

namespace fsda {

PtcOutcome ptc_qr(const Eigen::MatrixXd& block, double tau, int m_max) {
  const int n = static_cast<int>(block.rows());
  const int m = static_cast<int>(block.cols());
  PtcOutcome out;
  out.tau = tau;
  if (m == 0 || n == 0) {
    out.q = Eigen::MatrixXd(n, 0);
    out.u = Eigen::MatrixXd(0, m);
    return out;
  }
  cost::add(cost::Bucket::kQr,
            static_cast<std::int64_t>(n) * m * std::min(n, m));

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(block);
  const int diag_len = std::min(n, m);
  const Eigen::MatrixXd& qrm = qr.matrixQR();
  const double head = std::abs(qrm(0, 0));

  // Pivoting makes |R(i,i)| nonincreasing, so the kept rank is the first
  // diagonal entry at or below the threshold.
  int by_tau = 0;
  while (by_tau < diag_len && std::abs(qrm(by_tau, by_tau)) > tau * head) {
    ++by_tau;
  }
  if (head == 0.0) by_tau = 0;
  const int r = std::min(by_tau, std::max(m_max, 0));
  out.hard_cut = r < by_tau;
  out.rank = r;

  out.q = qr.householderQ() * Eigen::MatrixXd::Identity(n, r);
  const Eigen::MatrixXd rmat =
      qrm.topRows(diag_len).triangularView<Eigen::Upper>();
  out.u = rmat.topRows(r) * qr.colsPermutation().transpose();
  if (r < diag_len) {
    const Eigen::MatrixXd tail =
        rmat.bottomRows(diag_len - r) * qr.colsPermutation().transpose();
    out.discarded_norm =
        Eigen::JacobiSVD<Eigen::MatrixXd>(tail).singularValues()(0);
  }
  return out;
}

namespace {

/// Congruence K <- (I_pre + U + I_post) K (same)^T where U sits on the
/// segment [off, off + m) which it maps to r new columns.
Eigen::MatrixXd fold_symmetric(const Eigen::MatrixXd& k,
                               const Eigen::MatrixXd& u, int off) {
  const int m = static_cast<int>(u.cols());
  const int r = static_cast<int>(u.rows());
  const int total = static_cast<int>(k.cols());
  const int post = total - off - m;

  Eigen::MatrixXd tmp(total, total - m + r);
  tmp.leftCols(off) = k.leftCols(off);
  tmp.middleCols(off, r) = k.middleCols(off, m) * u.transpose();
  tmp.rightCols(post) = k.rightCols(post);

  Eigen::MatrixXd next(total - m + r, total - m + r);
  next.topRows(off) = tmp.topRows(off);
  next.middleRows(off, r) = u * tmp.middleRows(off, m);
  next.bottomRows(post) = tmp.bottomRows(post);
  cost::add(cost::Bucket::kQr, 2ll * r * m * total);
  return next;
}

Eigen::MatrixXd fold_rows(const Eigen::MatrixXd& k, const Eigen::MatrixXd& u,
                          int off) {
  const int m = static_cast<int>(u.cols());
  const int r = static_cast<int>(u.rows());
  const int rows = static_cast<int>(k.rows());
  const int post = rows - off - m;
  Eigen::MatrixXd next(rows - m + r, k.cols());
  next.topRows(off) = k.topRows(off);
  next.middleRows(off, r) = u * k.middleRows(off, m);
  next.bottomRows(post) = k.bottomRows(post);
  cost::add(cost::Bucket::kQr, static_cast<std::int64_t>(r) * m * k.cols());
  return next;
}

Eigen::MatrixXd fold_cols(const Eigen::MatrixXd& k, const Eigen::MatrixXd& u,
                          int off) {
  return fold_rows(k.transpose(), u, off).transpose();
}

std::vector<int> ledger_widths(const TallFactor& f) {
  std::vector<int> w;
  for (const Segment& seg : f.segments()) w.push_back(seg.width);
  return w;
}

/// Compresses the middle segment shared by `primary` (lG or lH, whose
/// square kernel gets the symmetric fold) and `mate` (the lA factor that
/// holds the same columns as its leading block).
PtcOutcome compress_side(TallFactor& primary, TallFactor& mate,
                         SegRole middle, Eigen::MatrixXd& kernel,
                         double tau, int m_max) {
  const int idx = primary.find_role(middle);
  if (idx < 0) return PtcOutcome{};
  const int off = primary.offset(idx);

  PtcOutcome out = ptc_qr(primary.view(idx), tau, m_max);
  kernel = fold_symmetric(kernel, out.u, off);
  primary.replace_segment(idx, out.q);

  const int midx = mate.find_role(middle);
  if (midx >= 0) mate.replace_segment(midx, out.q);
  return out;
}

Eigen::MatrixXd erase_rows(const Eigen::MatrixXd& m, int begin, int width) {
  Eigen::MatrixXd out(m.rows() - width, m.cols());
  out.topRows(begin) = m.topRows(begin);
  out.bottomRows(m.rows() - begin - width) =
      m.bottomRows(m.rows() - begin - width);
  return out;
}

Eigen::MatrixXd erase_cols(const Eigen::MatrixXd& m, int begin, int width) {
  return erase_rows(m.transpose(), begin, width).transpose();
}

}  // namespace

PtcApplication apply_ptc(FsdaState& s, const SolverConfig& cfg) {
  PtcApplication app;
  const int m_max = cfg.resolve_m_max(s.ma);

  // Offsets of the shared middle blocks inside the A-factor ledgers, taken
  // before compression rewrites (or removes) those segments.
  const int ig2_mate = s.lA1.find_role(SegRole::kG2);
  const int ig2_off = ig2_mate >= 0 ? s.lA1.offset(ig2_mate) : 0;
  const int ih2_mate = s.lA2.find_role(SegRole::kH2);
  const int ih2_off = ih2_mate >= 0 ? s.lA2.offset(ih2_mate) : 0;

  Eigen::MatrixXd kg = s.kG.data();
  const PtcOutcome og =
      compress_side(s.lG, s.lA1, SegRole::kG2, kg, cfg.tau_g, m_max);
  app.rank_g = og.rank;
  app.discarded_g = og.discarded_norm;
  app.hard_cut_g = og.hard_cut;
  s.kG = BlockKernel::square(std::move(kg), ledger_widths(s.lG));

  Eigen::MatrixXd kh = s.kH.data();
  const PtcOutcome oh =
      compress_side(s.lH, s.lA2, SegRole::kH2, kh, cfg.tau_h, m_max);
  app.rank_h = oh.rank;
  app.discarded_h = oh.discarded_norm;
  app.hard_cut_h = oh.hard_cut;
  s.kH = BlockKernel::square(std::move(kh), ledger_widths(s.lH));

  // The A kernel's rows follow lA1, whose middle block was just rewritten
  // by the G-side fold; its columns follow lA2 and the H-side fold.
  Eigen::MatrixXd ka = s.kA.data();
  if (ig2_mate >= 0) ka = fold_rows(ka, og.u, ig2_off);
  if (ih2_mate >= 0) ka = fold_cols(ka, oh.u, ih2_off);
  s.kA = BlockKernel(std::move(ka), ledger_widths(s.lA1),
                     ledger_widths(s.lA2));

  s.rank_g = app.rank_g;
  s.rank_h = app.rank_h;
  s.check();
  return app;
}

MonitorReport monitor_prune(FsdaState& s, const SolverConfig& cfg) {
  MonitorReport rep;

  const int ig3 = s.lG.find_role(SegRole::kG3);
  if (ig3 >= 0 && s.lG.view(ig3).norm() < cfg.tau_g) {
    const int off = s.lG.offset(ig3);
    const int w = s.lG.segments()[ig3].width;
    Eigen::MatrixXd kg = erase_cols(erase_rows(s.kG.data(), off, w), off, w);
    s.lG.erase_segment(ig3);
    s.kG = BlockKernel::square(std::move(kg), ledger_widths(s.lG));
    rep.deleted_g3 = true;
  }
  const int ih3 = s.lH.find_role(SegRole::kH3);
  if (ih3 >= 0 && s.lH.view(ih3).norm() < cfg.tau_h) {
    const int off = s.lH.offset(ih3);
    const int w = s.lH.segments()[ih3].width;
    Eigen::MatrixXd kh = erase_cols(erase_rows(s.kH.data(), off, w), off, w);
    s.lH.erase_segment(ih3);
    s.kH = BlockKernel::square(std::move(kh), ledger_widths(s.lH));
    rep.deleted_h3 = true;
  }
  const int ia1 = s.lA1.find_role(SegRole::kA1Tail);
  bool ka_changed = false;
  Eigen::MatrixXd ka = s.kA.data();
  if (ia1 >= 0 && s.lA1.view(ia1).norm() < cfg.tau_g) {
    ka = erase_rows(ka, s.lA1.offset(ia1), s.lA1.segments()[ia1].width);
    s.lA1.erase_segment(ia1);
    rep.deleted_a1_tail = true;
    ka_changed = true;
  }
  const int ia2 = s.lA2.find_role(SegRole::kA2Tail);
  if (ia2 >= 0 && s.lA2.view(ia2).norm() < cfg.tau_h) {
    ka = erase_cols(ka, s.lA2.offset(ia2), s.lA2.segments()[ia2].width);
    s.lA2.erase_segment(ia2);
    rep.deleted_a2_tail = true;
    ka_changed = true;
  }
  if (ka_changed) {
    s.kA = BlockKernel(std::move(ka), ledger_widths(s.lA1),
                       ledger_widths(s.lA2));
  }

  // Settled head blocks only collect entries that decay; scrub the ones
  // below the global zero threshold.  The growing middles stay untouched.
  for (int i = 0; i < static_cast<int>(s.lG.segments().size()); ++i) {
    const SegRole role = s.lG.segments()[i].role;
    if (role == SegRole::kG1 || role == SegRole::kG3) {
      s.lG.prune_segment(i, cfg.tol);
    }
  }
  for (int i = 0; i < static_cast<int>(s.lH.segments().size()); ++i) {
    const SegRole role = s.lH.segments()[i].role;
    if (role == SegRole::kH1 || role == SegRole::kH3) {
      s.lH.prune_segment(i, cfg.tol);
    }
  }
  s.dA.prune(cfg.tol);
  s.dG.prune(cfg.tol);
  s.dH.prune(cfg.tol);
  s.check();
  return rep;
}

}  // namespace fsda
