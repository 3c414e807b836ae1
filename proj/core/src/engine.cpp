// SPDX-License-Identifier: MIT
#include "fsda/engine.hpp"

#include <algorithm>
#include <cassert>

#include "fsda/cost.hpp"
#include "fsda/errors.hpp"

namespace fsda {

namespace {

std::int64_t mac(std::int64_t m, std::int64_t n, std::int64_t k) {
  return m * n * k;
}

/// band_apply plus cost attribution.
Eigen::MatrixXd apply_counted(const BandedMatrix& d, const Eigen::MatrixXd& t,
                              cost::Bucket bucket) {
  cost::add(bucket, band_apply_macs(d, static_cast<int>(t.cols())));
  return band_apply(d, t);
}

}  // namespace

void FsdaState::check() const {
  lG.check();
  lH.check();
  lA1.check();
  lA2.check();
  check_canonical(lG, FactorKind::kLg);
  check_canonical(lH, FactorKind::kLh);
  check_canonical(lA1, FactorKind::kLa1);
  check_canonical(lA2, FactorKind::kLa2);
  if (kG.rows() != mg() || kG.cols() != mg() || kH.rows() != mh() ||
      kH.cols() != mh() || kA.rows() != ma1() || kA.cols() != ma2()) {
    throw FsdaError("kernel dimensions disagree with factor widths");
  }
  // The compressed middle segments are shared: same width in both ledgers.
  const int g2_g = lG.role_width(SegRole::kG2);
  const int g2_a = lA1.role_width(SegRole::kG2);
  if (g2_g != g2_a) {
    throw FsdaError("G2 segment width differs between lG and lA1");
  }
  const int h2_h = lH.role_width(SegRole::kH2);
  const int h2_a = lA2.role_width(SegRole::kH2);
  if (h2_h != h2_a) {
    throw FsdaError("H2 segment width differs between lH and lA2");
  }
}

FsdaState init_state(const DareProblem& p, const SolverConfig& cfg) {
  p.check();
  cfg.validate();
  const int n = p.n();
  FsdaState s;
  s.k = 1;
  s.ma = p.lA10.cols();
  const int init_bw = std::max(
      {p.dA0.half_bw(), p.dG0.half_bw(), p.dH0.half_bw(), 1});
  s.max_bw = cfg.resolve_max_bw(n, init_bw);

  const HelperSet h =
      make_gh_helpers(p.dA0, p.dG0, p.dH0, cfg.band_drop, s.max_bw);
  s.dA = band_mul(h.agh, p.dA0, cfg.band_drop);
  s.dG =
      band_add(p.dG0, band_mul(h.aghg, p.dA0.transposed(), cfg.band_drop));
  s.dH = band_add(p.dH0, band_mul(h.athgh, p.dA0, cfg.band_drop));

  if (s.ma == 0) {
    s.lG = TallFactor(n);
    s.lH = TallFactor(n);
    s.lA1 = TallFactor(n);
    s.lA2 = TallFactor(n);
    s.kG = BlockKernel(Eigen::MatrixXd(0, 0), {}, {});
    s.kH = BlockKernel(Eigen::MatrixXd(0, 0), {}, {});
    s.kA = BlockKernel(Eigen::MatrixXd(0, 0), {}, {});
    return s;
  }

  const int ma = s.ma;
  const Eigen::MatrixXd& l1 = p.lA10.data();
  const Eigen::MatrixXd& l2 = p.lA20.data();

  const Eigen::MatrixXd aghg_l2 =
      apply_counted(h.aghg, l2, cost::Bucket::kFactorProduct);
  const Eigen::MatrixXd athgh_l1 =
      apply_counted(h.athgh, l1, cost::Bucket::kFactorProduct);
  const Eigen::MatrixXd agh_l1 =
      apply_counted(h.agh, l1, cost::Bucket::kFactorProduct);
  const Eigen::MatrixXd athg_l2 =
      apply_counted(h.athg, l2, cost::Bucket::kFactorProduct);

  s.lG = TallFactor(n);
  s.lG.append(l1, {ma, SegRole::kG2, 1});
  s.lG.append(aghg_l2, {ma, SegRole::kG3, 1});
  s.lH = TallFactor(n);
  s.lH.append(l2, {ma, SegRole::kH2, 1});
  s.lH.append(athgh_l1, {ma, SegRole::kH3, 1});
  s.lA1 = TallFactor(n);
  s.lA1.append(l1, {ma, SegRole::kG2, 1});
  s.lA1.append(agh_l1, {ma, SegRole::kA1Tail, 1});
  s.lA2 = TallFactor(n);
  s.lA2.append(l2, {ma, SegRole::kH2, 1});
  s.lA2.append(athg_l2, {ma, SegRole::kA2Tail, 1});

  // Kernels at k = 1: [[theta, I], [I, 0]] with the Gram matrix of the
  // corresponding helper between the original columns.
  const Eigen::MatrixXd theta_g =
      l2.transpose() * apply_counted(h.ghg, l2, cost::Bucket::kKernel);
  const Eigen::MatrixXd theta_h =
      l1.transpose() * apply_counted(h.hgh, l1, cost::Bucket::kKernel);
  const Eigen::MatrixXd theta_a =
      l2.transpose() * apply_counted(h.gh, l1, cost::Bucket::kKernel);
  cost::add(cost::Bucket::kKernel, 3 * mac(ma, n, ma));

  const auto corner = [ma](const Eigen::MatrixXd& theta) {
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(2 * ma, 2 * ma);
    k.topLeftCorner(ma, ma) = theta;
    k.topRightCorner(ma, ma) = Eigen::MatrixXd::Identity(ma, ma);
    k.bottomLeftCorner(ma, ma) = Eigen::MatrixXd::Identity(ma, ma);
    return k;
  };
  s.kG = BlockKernel::square(corner(theta_g), {ma, ma});
  s.kH = BlockKernel::square(corner(theta_h), {ma, ma});
  s.kA = BlockKernel::square(corner(theta_a), {ma, ma});
  s.rank_g = ma;
  s.rank_h = ma;
  cost::note_factor_values(static_cast<std::int64_t>(n) *
                           (s.mg() + s.mh() + s.ma1() + s.ma2()));
  s.check();
  return s;
}

BandedStep banded_step(const FsdaState& s, const SolverConfig& cfg) {
  BandedStep bs;
  bs.helpers =
      make_gh_helpers(s.dA, s.dG, s.dH, cfg.band_drop, s.max_bw, &bs.inv_diag);
  bs.dA_next = band_mul(bs.helpers.agh, s.dA, cfg.band_drop);
  bs.dG_next = band_add(
      s.dG, band_mul(bs.helpers.aghg, s.dA.transposed(), cfg.band_drop));
  bs.dH_next =
      band_add(s.dH, band_mul(bs.helpers.athgh, s.dA, cfg.band_drop));
  return bs;
}

ThetaSet compute_thetas(const FsdaState& s, const HelperSet& h) {
  ThetaSet th;
  const int n = s.dA.n();
  const auto& lg = s.lG.data();
  const auto& lh = s.lH.data();
  const auto& la1 = s.lA1.data();
  const auto& la2 = s.lA2.data();

  // Seven banded-times-tall products feed all ten Gram matrices.
  const Eigen::MatrixXd ghg_lh =
      apply_counted(h.ghg, lh, cost::Bucket::kKernel);
  const Eigen::MatrixXd hgh_lg =
      apply_counted(h.hgh, lg, cost::Bucket::kKernel);
  const Eigen::MatrixXd gh_lg = apply_counted(h.gh, lg, cost::Bucket::kKernel);
  const Eigen::MatrixXd gh_la1 =
      apply_counted(h.gh, la1, cost::Bucket::kKernel);
  const Eigen::MatrixXd hgh_la1 =
      apply_counted(h.hgh, la1, cost::Bucket::kKernel);
  const Eigen::MatrixXd ghg_la2 =
      apply_counted(h.ghg, la2, cost::Bucket::kKernel);
  const Eigen::MatrixXd hg_lh = apply_counted(h.hg, lh, cost::Bucket::kKernel);

  th.h = lh.transpose() * ghg_lh;
  th.g = lg.transpose() * hgh_lg;
  th.hg = lh.transpose() * gh_lg;
  th.a = la2.transpose() * gh_la1;
  th.a1 = la1.transpose() * hgh_la1;
  th.a2 = la2.transpose() * ghg_la2;
  th.ah1 = la1.transpose() * hg_lh;
  th.ag1 = la1.transpose() * hgh_lg;
  th.ah2 = la2.transpose() * ghg_lh;
  th.ag2 = la2.transpose() * gh_lg;
  cost::add(cost::Bucket::kKernel,
            mac(s.mh(), n, s.mh()) + mac(s.mg(), n, s.mg()) +
                mac(s.mh(), n, s.mg()) + mac(s.ma2(), n, s.ma1()) +
                mac(s.ma1(), n, s.ma1()) + mac(s.ma2(), n, s.ma2()) +
                mac(s.ma1(), n, s.mh()) + mac(s.ma1(), n, s.mg()) +
                mac(s.ma2(), n, s.mh()) + mac(s.ma2(), n, s.mg()));
  return th;
}

KernelComponents kernel_components(const FsdaState& s, const ThetaSet& th) {
  KernelComponents kc;
  const int mg = s.mg(), mh = s.mh(), ma1 = s.ma1(), ma2 = s.ma2();
  const auto& ka = s.kA.data();

  // Coupled middle system: the kernel image of (I + G_k H_k)^-1 between
  // the H and G factor column spaces.
  Eigen::MatrixXd bmat(mh + mg, mh + mg);
  bmat.topLeftCorner(mh, mh) = -th.h;
  bmat.topRightCorner(mh, mg) = th.hg;
  bmat.bottomLeftCorner(mg, mh) = th.hg.transpose();
  bmat.bottomRightCorner(mg, mg) = th.g;
  Eigen::MatrixXd dmat = Eigen::MatrixXd::Zero(mh + mg, mh + mg);
  dmat.topLeftCorner(mh, mh) = -s.kH.data();
  dmat.bottomRightCorner(mg, mg) = s.kG.data();
  const Eigen::MatrixXd middle =
      Eigen::MatrixXd::Identity(mh + mg, mh + mg) + bmat * dmat;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(middle);
  if (mh + mg > 0 && !lu.isInvertible()) {
    throw BreakdownError(s.k, "coupled kernel middle system is singular");
  }
  Eigen::MatrixXd lmat = Eigen::MatrixXd::Zero(mg + mh, mh + mg);
  lmat.topRightCorner(mg, mg) = s.kG.data();
  lmat.bottomLeftCorner(mh, mh) = s.kH.data();
  kc.gh = lmat * lu.inverse();

  // Left/right rotations of gh by the skew block permutation.
  kc.ghg.resize(mg + mh, mg + mh);
  kc.ghg.leftCols(mg) = -kc.gh.rightCols(mg);
  kc.ghg.rightCols(mh) = kc.gh.leftCols(mh);
  kc.hgh.resize(mh + mg, mh + mg);
  kc.hgh.topRows(mh) = -kc.gh.bottomRows(mh);
  kc.hgh.bottomRows(mg) = kc.gh.topRows(mg);

  Eigen::MatrixXd br2(ma2, mg + mh);  // [theta_ag2, theta_ah2]
  br2.leftCols(mg) = th.ag2;
  br2.rightCols(mh) = th.ah2;
  Eigen::MatrixXd br1(ma1, mh + mg);  // [theta_ah1, theta_ag1]
  br1.leftCols(mh) = th.ah1;
  br1.rightCols(mg) = th.ag1;

  kc.aghg = -ka * (br2 * kc.ghg);
  kc.athgh = -ka.transpose() * (br1 * kc.hgh);
  kc.aghga = ka * th.a2 * ka.transpose() +
             kc.aghg * br2.transpose() * ka.transpose();
  kc.athgha =
      ka.transpose() * th.a1 * ka + kc.athgh * br1.transpose() * ka;
  kc.agh = -ka * (br2 * kc.gh);
  kc.atgh = -ka.transpose() * (br1 * kc.gh.transpose());
  kc.agha = ka * th.a * ka + kc.agh * br1.transpose() * ka;

  const std::int64_t w = mg + mh;
  cost::add(cost::Bucket::kKernel,
            mac(w, w, w) * 4 +                  // middle inverse and gh
                mac(ma2, w, w) * 2 +            // bracket rotations
                mac(ma1, ma2, w) * 4 +          // cross products
                mac(ma1, ma1, ma2) * 4);        // diagonal products
  return kc;
}

namespace {

/// Copies every head segment (G1/H1 plus the G3/H3 tail joining the head)
/// of `src` into `dst`.
void carry_head(const TallFactor& src, SegRole head, SegRole tail,
                TallFactor& dst) {
  for (int i = 0; i < static_cast<int>(src.segments().size()); ++i) {
    const Segment& seg = src.segments()[i];
    if (seg.role == head) {
      dst.append(src.view(i), seg);
    } else if (seg.role == tail) {
      dst.append(src.view(i), {seg.width, head, seg.birth_k});
    }
  }
}

struct AdvanceProducts {
  Eigen::MatrixXd pg, pgh, qh, qhg;          // full-factor products
  Eigen::MatrixXd pa1t, pa2t, qa1t, qa2t;    // tail chain products
  int wa1t = 0, wa2t = 0;                    // tail widths (0 if absent)
};

AdvanceProducts advance_products(const FsdaState& s, const HelperSet& h) {
  AdvanceProducts pr;
  pr.pg = apply_counted(h.agh, s.lG.data(), cost::Bucket::kFactorProduct);
  pr.pgh = apply_counted(h.aghg, s.lH.data(), cost::Bucket::kFactorProduct);
  pr.qh = apply_counted(h.athg, s.lH.data(), cost::Bucket::kFactorProduct);
  pr.qhg = apply_counted(h.athgh, s.lG.data(), cost::Bucket::kFactorProduct);
  const int ia1t = s.lA1.find_role(SegRole::kA1Tail);
  if (ia1t >= 0) {
    const Eigen::MatrixXd a1t = s.lA1.view(ia1t);
    pr.pa1t = apply_counted(h.agh, a1t, cost::Bucket::kFactorProduct);
    pr.qa1t = apply_counted(h.athgh, a1t, cost::Bucket::kFactorProduct);
    pr.wa1t = static_cast<int>(a1t.cols());
  }
  const int ia2t = s.lA2.find_role(SegRole::kA2Tail);
  if (ia2t >= 0) {
    const Eigen::MatrixXd a2t = s.lA2.view(ia2t);
    pr.pa2t = apply_counted(h.aghg, a2t, cost::Bucket::kFactorProduct);
    pr.qa2t = apply_counted(h.athg, a2t, cost::Bucket::kFactorProduct);
    pr.wa2t = static_cast<int>(a2t.cols());
  }
  return pr;
}

/// The full (un-deflated) next kernels; both assembly paths tile these and
/// then sum duplicate rows/columns away.
struct FullKernels {
  Eigen::MatrixXd kg, kh, ka;
  std::vector<ColMove> g_moves, h_moves, a1_rows, a2_cols;
};

FullKernels full_kernels(const FsdaState& s, const KernelComponents& kc) {
  const int mg = s.mg(), mh = s.mh(), ma1 = s.ma1(), ma2 = s.ma2();
  FullKernels out;

  // Next G kernel over column blocks (mg | ma1 | mg + mh | ma2) of
  // [ lG | lA1 | agh lG, aghg lH | aghg lA2 ].
  {
    const int w = mg + ma1 + mg + mh + ma2;
    const int at2 = mg, at3 = mg + ma1, at4 = mg + ma1 + mg + mh;
    Eigen::MatrixXd kg = Eigen::MatrixXd::Zero(w, w);
    kg.topLeftCorner(mg, mg) = s.kG.data();
    kg.block(at2, at2, ma1, ma1) = kc.aghga;
    kg.block(at2, at3, ma1, mg + mh) = kc.aghg;
    kg.block(at3, at2, mg + mh, ma1) = kc.aghg.transpose();
    kg.block(at2, at4, ma1, ma2) = s.kA.data();
    kg.block(at4, at2, ma2, ma1) = s.kA.data().transpose();
    kg.block(at3, at3, mg + mh, mg + mh) = -kc.ghg;
    out.kg = std::move(kg);

    const int ig2 = s.lG.find_role(SegRole::kG2);
    if (ig2 >= 0) {
      const int ig2a = s.lA1.find_role(SegRole::kG2);
      assert(ig2a >= 0 && "lG has a G2 segment but lA1 does not");
      out.g_moves.push_back({s.lG.offset(ig2), s.lG.segments()[ig2].width,
                             at2 + s.lA1.offset(ig2a)});
    }
    const int ih2a = s.lA2.find_role(SegRole::kH2);
    if (ih2a >= 0) {
      const int ih2 = s.lH.find_role(SegRole::kH2);
      assert(ih2 >= 0 && "lA2 has an H2 segment but lH does not");
      out.g_moves.push_back({at4 + s.lA2.offset(ih2a),
                             s.lA2.segments()[ih2a].width,
                             at3 + mg + s.lH.offset(ih2)});
    }
  }

  // Next H kernel over column blocks (mh | ma2 | mh + mg | ma1) of
  // [ lH | lA2 | athg lH, athgh lG | athgh lA1 ].
  {
    const int w = mh + ma2 + mh + mg + ma1;
    const int at2 = mh, at3 = mh + ma2, at4 = mh + ma2 + mh + mg;
    Eigen::MatrixXd kh = Eigen::MatrixXd::Zero(w, w);
    kh.topLeftCorner(mh, mh) = s.kH.data();
    kh.block(at2, at2, ma2, ma2) = kc.athgha;
    kh.block(at2, at3, ma2, mh + mg) = kc.athgh;
    kh.block(at3, at2, mh + mg, ma2) = kc.athgh.transpose();
    kh.block(at2, at4, ma2, ma1) = s.kA.data().transpose();
    kh.block(at4, at2, ma1, ma2) = s.kA.data();
    kh.block(at3, at3, mh + mg, mh + mg) = -kc.hgh;
    out.kh = std::move(kh);

    const int ih2 = s.lH.find_role(SegRole::kH2);
    if (ih2 >= 0) {
      const int ih2a = s.lA2.find_role(SegRole::kH2);
      assert(ih2a >= 0);
      out.h_moves.push_back({s.lH.offset(ih2), s.lH.segments()[ih2].width,
                             at2 + s.lA2.offset(ih2a)});
    }
    const int ig2a = s.lA1.find_role(SegRole::kG2);
    if (ig2a >= 0) {
      const int ig2 = s.lG.find_role(SegRole::kG2);
      assert(ig2 >= 0);
      out.h_moves.push_back({at4 + s.lA1.offset(ig2a),
                             s.lA1.segments()[ig2a].width,
                             at3 + mh + s.lG.offset(ig2)});
    }
  }

  // Next A kernel: rows follow [ lA1 | agh lG, aghg lH | agh lA1 ],
  // columns follow [ lA2 | athg lH, athgh lG | athg lA2 ].
  {
    const int wr = ma1 + mg + mh + ma1;
    const int wc = ma2 + mh + mg + ma2;
    Eigen::MatrixXd ka = Eigen::MatrixXd::Zero(wr, wc);
    ka.block(0, 0, ma1, ma2) = kc.agha;
    ka.block(0, ma2, ma1, mh + mg) = kc.agh;
    ka.block(0, ma2 + mh + mg, ma1, ma2) = s.kA.data();
    ka.block(ma1, 0, mg + mh, ma2) = kc.atgh.transpose();
    ka.block(ma1, ma2, mg + mh, mh + mg) = -kc.gh;
    ka.block(ma1 + mg + mh, 0, ma1, ma2) = s.kA.data();
    out.ka = std::move(ka);

    const int ig2a = s.lA1.find_role(SegRole::kG2);
    if (ig2a >= 0) {
      const int ig2 = s.lG.find_role(SegRole::kG2);
      out.a1_rows.push_back({ma1 + mg + mh + s.lA1.offset(ig2a),
                             s.lA1.segments()[ig2a].width,
                             ma1 + s.lG.offset(ig2)});
    }
    const int ih2a = s.lA2.find_role(SegRole::kH2);
    if (ih2a >= 0) {
      const int ih2 = s.lH.find_role(SegRole::kH2);
      out.a2_cols.push_back({ma2 + mh + mg + s.lA2.offset(ih2a),
                             s.lA2.segments()[ih2a].width,
                             ma2 + s.lH.offset(ih2)});
    }
  }
  return out;
}

}  // namespace

FsdaState assemble_next(const FsdaState& s, const BandedStep& bs,
                        const KernelComponents& kc) {
  const int n = s.dA.n();
  FsdaState next;
  next.k = s.k + 1;
  next.ma = s.ma;
  next.max_bw = s.max_bw;
  next.rank_g = s.rank_g;
  next.rank_h = s.rank_h;
  next.dA = bs.dA_next;
  next.dG = bs.dG_next;
  next.dH = bs.dH_next;
  if (s.ma == 0) {
    next.lG = TallFactor(n);
    next.lH = TallFactor(n);
    next.lA1 = TallFactor(n);
    next.lA2 = TallFactor(n);
    next.kG = BlockKernel(Eigen::MatrixXd(0, 0), {}, {});
    next.kH = BlockKernel(Eigen::MatrixXd(0, 0), {}, {});
    next.kA = BlockKernel(Eigen::MatrixXd(0, 0), {}, {});
    return next;
  }

  const int mg = s.mg(), mh = s.mh(), ma1 = s.ma1(), ma2 = s.ma2();
  const AdvanceProducts pr = advance_products(s, bs.helpers);

  // Factors, directly in deflated layout.  The middle segments reuse the
  // previous lA1/lA2 columns verbatim (that sharing is exactly what the
  // deflation exploits), so no wide intermediate is ever formed.
  Eigen::MatrixXd g2(n, ma1 + mg + mh);
  if (ma1 > 0) g2.leftCols(ma1) = s.lA1.data();
  g2.middleCols(ma1, mg) = pr.pg;
  g2.rightCols(mh) = pr.pgh;
  Eigen::MatrixXd h2(n, ma2 + mh + mg);
  if (ma2 > 0) h2.leftCols(ma2) = s.lA2.data();
  h2.middleCols(ma2, mh) = pr.qh;
  h2.rightCols(mg) = pr.qhg;

  next.lG = TallFactor(n);
  carry_head(s.lG, SegRole::kG1, SegRole::kG3, next.lG);
  next.lG.append(g2, {ma1 + mg + mh, SegRole::kG2, next.k});
  if (pr.wa2t > 0) {
    next.lG.append(pr.pa2t, {pr.wa2t, SegRole::kG3, next.k});
  }
  next.lH = TallFactor(n);
  carry_head(s.lH, SegRole::kH1, SegRole::kH3, next.lH);
  next.lH.append(h2, {ma2 + mh + mg, SegRole::kH2, next.k});
  if (pr.wa1t > 0) {
    next.lH.append(pr.qa1t, {pr.wa1t, SegRole::kH3, next.k});
  }
  next.lA1 = TallFactor(n);
  next.lA1.append(g2, {ma1 + mg + mh, SegRole::kG2, next.k});
  if (pr.wa1t > 0) {
    next.lA1.append(pr.pa1t, {pr.wa1t, SegRole::kA1Tail, next.k});
  }
  next.lA2 = TallFactor(n);
  next.lA2.append(h2, {ma2 + mh + mg, SegRole::kH2, next.k});
  if (pr.wa2t > 0) {
    next.lA2.append(pr.qa2t, {pr.wa2t, SegRole::kA2Tail, next.k});
  }

  // Kernels: tile the full block layout (small) and sum the duplicated
  // rows/columns into their twins.
  FullKernels fk = full_kernels(s, kc);
  const auto widths = [](const TallFactor& f) {
    std::vector<int> w;
    for (const Segment& seg : f.segments()) w.push_back(seg.width);
    return w;
  };
  next.kG = BlockKernel::square(
      merge_cols_sum(merge_rows_sum(fk.kg, fk.g_moves), fk.g_moves),
      widths(next.lG));
  next.kH = BlockKernel::square(
      merge_cols_sum(merge_rows_sum(fk.kh, fk.h_moves), fk.h_moves),
      widths(next.lH));
  next.kA = BlockKernel(
      merge_cols_sum(merge_rows_sum(fk.ka, fk.a1_rows), fk.a2_cols),
      widths(next.lA1), widths(next.lA2));

  cost::note_factor_values(static_cast<std::int64_t>(n) *
                           (next.mg() + next.mh() + next.ma1() + next.ma2()));
  next.check();
  return next;
}

UndeflatedAdvance assemble_next_undeflated(const FsdaState& s,
                                           const BandedStep& bs,
                                           const KernelComponents& kc) {
  const int n = s.dA.n();
  const HelperSet& h = bs.helpers;
  UndeflatedAdvance out;
  if (s.ma == 0) {
    out.lG = out.lH = out.lA1 = out.lA2 = TallFactor(n);
    out.kG = out.kH = out.kA = BlockKernel(Eigen::MatrixXd(0, 0), {}, {});
    return out;
  }
  const AdvanceProducts pr = advance_products(s, h);

  // Helper products of the full lA1/lA2 factors (the deflated path never
  // forms the leading parts of these).  Segments mirror the source ledger
  // so the merge moves cover whole segments.
  const Eigen::MatrixXd p_la2 = band_apply(h.aghg, s.lA2.data());
  const Eigen::MatrixXd q_la1 = band_apply(h.athgh, s.lA1.data());
  const Eigen::MatrixXd p_la1 = band_apply(h.agh, s.lA1.data());
  const Eigen::MatrixXd q_la2 = band_apply(h.athg, s.lA2.data());

  const auto with_ledger = [](const Eigen::MatrixXd& data,
                              const std::vector<Segment>& segs) {
    return TallFactor(data, segs);
  };
  const auto one_seg = [](const Eigen::MatrixXd& data) {
    return TallFactor(data, Segment{static_cast<int>(data.cols()),
                                    SegRole::kR, 0});
  };

  const TallFactor pg_f = one_seg(pr.pg);
  const TallFactor pgh_f = one_seg(pr.pgh);
  const TallFactor qh_f = one_seg(pr.qh);
  const TallFactor qhg_f = one_seg(pr.qhg);
  const TallFactor p_la2_f = with_ledger(p_la2, s.lA2.segments());
  const TallFactor q_la1_f = with_ledger(q_la1, s.lA1.segments());
  const TallFactor p_la1_f = with_ledger(p_la1, s.lA1.segments());
  const TallFactor q_la2_f = with_ledger(q_la2, s.lA2.segments());

  out.lG = TallFactor::hstack({&s.lG, &s.lA1, &pg_f, &pgh_f, &p_la2_f});
  out.lH = TallFactor::hstack({&s.lH, &s.lA2, &qh_f, &qhg_f, &q_la1_f});
  out.lA1 = TallFactor::hstack({&s.lA1, &pg_f, &pgh_f, &p_la1_f});
  out.lA2 = TallFactor::hstack({&s.lA2, &qh_f, &qhg_f, &q_la2_f});

  FullKernels fk = full_kernels(s, kc);
  const auto widths = [](const TallFactor& f) {
    std::vector<int> w;
    for (const Segment& seg : f.segments()) w.push_back(seg.width);
    return w;
  };
  out.kG = BlockKernel::square(fk.kg, widths(out.lG));
  out.kH = BlockKernel::square(fk.kh, widths(out.lH));
  out.kA = BlockKernel(fk.ka, widths(out.lA1), widths(out.lA2));
  out.g_moves = std::move(fk.g_moves);
  out.h_moves = std::move(fk.h_moves);
  out.a1_row_moves = std::move(fk.a1_rows);
  out.a2_col_moves = std::move(fk.a2_cols);
  return out;
}

}  // namespace fsda
