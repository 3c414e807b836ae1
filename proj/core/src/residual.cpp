// SPDX-License-Identifier: MIT
#include "fsda/residual.hpp"

#include <algorithm>
#include <limits>
#include <vector>

#include "fsda/cost.hpp"
#include "fsda/factor.hpp"
#include "fsda/reduction.hpp"

namespace fsda {

namespace {

Eigen::MatrixXd apply_counted(const BandedMatrix& d, const Eigen::MatrixXd& t) {
  cost::add(cost::Bucket::kResidual,
            band_apply_macs(d, static_cast<int>(t.cols())));
  return band_apply(d, t);
}

}  // namespace

TildeCache make_tilde(const DareProblem& p, const FsdaState& s,
                      const SolverConfig& cfg) {
  TildeCache t;
  const int n = p.n();
  const BandedMatrix w = band_add(BandedMatrix::identity(n),
                                  band_mul(s.dH, p.dG0, cfg.band_drop));
  t.hg = band_inv_approx(w, cfg.band_drop, s.max_bw, &t.diag);
  t.hgh = band_mul(t.hg, s.dH, cfg.band_drop);
  t.ghg = band_mul(p.dG0, t.hg, cfg.band_drop);
  return t;
}

BandedResidual banded_residual(const DareProblem& p, const FsdaState& s,
                               const TildeCache& t, const SolverConfig& cfg) {
  BandedResidual out;
  const BandedMatrix dat = p.dA0.transposed();
  const BandedMatrix athgh = band_mul(dat, t.hgh, cfg.band_drop);
  out.dr = band_add(band_sub(p.dH0, s.dH),
                    band_mul(athgh, p.dA0, cfg.band_drop));

  const BandedMatrix& dscale =
      cfg.denominator == DenominatorMode::kVerbatim ? p.dH0 : p.dG0;
  const double inner =
      band_add(BandedMatrix::identity(p.n()),
               band_mul(dscale, s.dH, cfg.band_drop))
          .frobenius_norm();
  const double na = p.dA0.frobenius_norm();
  const double nhk = s.dH.frobenius_norm();
  double den = p.dH0.frobenius_norm() + nhk;
  if (inner > 0.0) den += na * na * nhk / inner;
  out.b_rres = den > 0.0 ? out.dr.frobenius_norm() / den : 0.0;
  return out;
}

LowRankResidual lowrank_residual(const DareProblem& p, const FsdaState& s,
                                 const TildeCache& t, const SolverConfig& cfg) {
  LowRankResidual out;
  const int n = p.n();
  const int ma = p.lA10.cols();
  const int mh = s.mh();
  const Eigen::MatrixXd& l1 = p.lA10.data();
  const Eigen::MatrixXd& l2 = p.lA20.data();
  const Eigen::MatrixXd& lh = s.lH.data();
  const Eigen::MatrixXd& kh = s.kH.data();

  // Woodbury pieces: the low-rank part of H_k feeds through the banded
  // inverse as a small corrected kernel kt_h, and the original low-rank
  // part of A contributes through the L1 cross terms.
  const Eigen::MatrixXd theta = lh.transpose() * apply_counted(t.ghg, lh);
  const Eigen::MatrixXd kt_h =
      mh > 0 ? Eigen::PartialPivLU<Eigen::MatrixXd>(
                   Eigen::MatrixXd::Identity(mh, mh) + kh * theta)
                   .solve(kh)
                   .eval()
             : Eigen::MatrixXd(0, 0);
  const Eigen::MatrixXd x = apply_counted(t.hg, lh);      // n x mh
  const Eigen::MatrixXd mat1 = l1.transpose() * x;        // ma x mh
  const Eigen::MatrixXd kt_ahg = mat1 * kt_h;             // ma x mh
  const Eigen::MatrixXd t1 = apply_counted(t.hgh, l1);    // n x ma
  const Eigen::MatrixXd kt_ahgha =
      l1.transpose() * t1 + kt_ahg * mat1.transpose();    // ma x ma
  cost::add(cost::Bucket::kResidual,
            static_cast<std::int64_t>(mh) * n * mh +
                static_cast<std::int64_t>(mh) * mh * mh +
                static_cast<std::int64_t>(ma) * n * (mh + ma) +
                2ll * ma * mh * mh + static_cast<std::int64_t>(ma) * ma * n);

  const BandedMatrix dat = p.dA0.transposed();
  const Eigen::MatrixXd t2 = apply_counted(dat, t1);      // n x ma
  const Eigen::MatrixXd t3 = apply_counted(dat, x);       // n x mh

  // Factor [L20 | t2 | t3 | lH] with kernel blocks (ma, ma, mh, mh).
  TallFactor lr(n);
  if (ma > 0) {
    lr.append(l2, {ma, SegRole::kR, s.k});
    lr.append(t2, {ma, SegRole::kR, s.k});
  }
  if (mh > 0) {
    lr.append(t3, {mh, SegRole::kR, s.k});
    lr.append(lh, {mh, SegRole::kR, s.k});
  }
  const int total = 2 * ma + 2 * mh;
  Eigen::MatrixXd kr = Eigen::MatrixXd::Zero(total, total);
  if (ma > 0) {
    kr.block(0, 0, ma, ma) = kt_ahgha;
    kr.block(0, ma, ma, ma) = Eigen::MatrixXd::Identity(ma, ma);
    kr.block(ma, 0, ma, ma) = Eigen::MatrixXd::Identity(ma, ma);
    kr.block(0, 2 * ma, ma, mh) = kt_ahg;
    kr.block(2 * ma, 0, mh, ma) = kt_ahg.transpose();
  }
  kr.block(2 * ma, 2 * ma, mh, mh) = kt_h;
  kr.block(2 * ma + mh, 2 * ma + mh, mh, mh) = -kh;

  // If the H factor still starts its middle block with the original L20
  // columns, that duplicate can be merged away exactly.
  out.lr = std::move(lr);
  out.kr = std::move(kr);
  const int ih2 = s.lH.find_role(SegRole::kH2);
  if (ma > 0 && ih2 >= 0 && s.lH.segments()[ih2].width >= ma) {
    const ColMove move{0, ma, 2 * ma + mh + s.lH.offset(ih2)};
    if (column_merge_deviation(out.lr.data(), {move}) <= 1e-13) {
      std::vector<int> blocks;
      for (const Segment& seg : out.lr.segments()) blocks.push_back(seg.width);
      auto [lrd, krd] = merge_columns(
          out.lr, BlockKernel::square(out.kr, blocks), {move});
      out.lr = std::move(lrd);
      out.kr = krd.data();
      out.deflated = true;
    }
  }

  const PtcOutcome pc =
      ptc_qr(out.lr.data(), cfg.tau_r, std::numeric_limits<int>::max());
  out.rank = pc.rank;
  const double nu = pc.u.norm();
  const double nk = out.kr.norm();
  if (nu > 0.0 && nk > 0.0) {
    const Eigen::MatrixXd core = pc.u * out.kr * pc.u.transpose();
    cost::add(cost::Bucket::kResidual,
              2ll * pc.rank * out.kr.rows() * out.kr.cols());
    out.lr_rres = core.norm() / (nu * nu * nk);
  }
  return out;
}

}  // namespace fsda
