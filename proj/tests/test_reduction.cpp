// SPDX-License-Identifier: MIT
#include <Eigen/Dense>
#include <doctest.h>

#include "fsda/problem.hpp"
#include "fsda/reduction.hpp"
#include "test_util.hpp"

using namespace fsda;
using namespace fsda::test;

TEST_CASE("rank-revealing QR truncation") {
  const int n = 40, r = 5, m = 12;
  const Eigen::MatrixXd block =
      Eigen::MatrixXd::Random(n, r) * Eigen::MatrixXd::Random(r, m);

  SUBCASE("recovers the numerical rank") {
    const PtcOutcome out = ptc_qr(block, 1e-10, 1 << 20);
    CHECK(out.rank == r);
    CHECK_FALSE(out.hard_cut);
    CHECK((out.q.transpose() * out.q -
           Eigen::MatrixXd::Identity(r, r)).norm() <= 1e-12);
    CHECK((out.q * out.u - block).norm() <= 1e-12 * block.norm());
    CHECK(out.discarded_norm <= 1e-12 * block.norm());
  }

  SUBCASE("reports what a coarse cut discards") {
    // A block with firmly decaying singular values, so the cut must land
    // strictly inside.
    Eigen::MatrixXd q1 =
        Eigen::HouseholderQR<Eigen::MatrixXd>(Eigen::MatrixXd::Random(n, r))
            .householderQ() *
        Eigen::MatrixXd::Identity(n, r);
    Eigen::MatrixXd q2 =
        Eigen::HouseholderQR<Eigen::MatrixXd>(Eigen::MatrixXd::Random(m, r))
            .householderQ() *
        Eigen::MatrixXd::Identity(m, r);
    Eigen::VectorXd sv(r);
    sv << 1.0, 1e-1, 1e-2, 1e-3, 1e-4;
    const Eigen::MatrixXd decayed = q1 * sv.asDiagonal() * q2.transpose();

    const PtcOutcome out = ptc_qr(decayed, 0.05, 1 << 20);
    CHECK(out.rank >= 1);
    CHECK(out.rank < r);
    const double err =
        (decayed - out.q * out.u).jacobiSvd().singularValues()(0);
    CHECK(out.discarded_norm == doctest::Approx(err).epsilon(1e-10));
  }

  SUBCASE("the cap forces a hard cut") {
    const PtcOutcome out = ptc_qr(block, 1e-10, 3);
    CHECK(out.rank == 3);
    CHECK(out.hard_cut);
  }

  SUBCASE("a zero block truncates to rank zero") {
    const PtcOutcome out = ptc_qr(Eigen::MatrixXd::Zero(n, 4), 1e-10, 8);
    CHECK(out.rank == 0);
    CHECK(out.q.cols() == 0);
    CHECK(out.discarded_norm == 0.0);
  }
}

TEST_CASE("compression keeps the iterate within the tolerance") {
  const DareProblem p = gen_instance(48, 2, 2, 0.6, 9);
  SolverConfig cfg = exact_config(48);
  FsdaState s = init_state(p, cfg);
  advance(s, cfg, /*compress=*/false);
  advance(s, cfg, /*compress=*/false);  // raw growing G2/H2 at k = 3

  SUBCASE("tau = 0 removes only rounding-level mass") {
    FsdaState t = s;
    const Eigen::MatrixXd g0 = recon_g(t), h0 = recon_h(t), a0 = recon_a(t);
    const PtcApplication app = apply_ptc(t, cfg);
    t.check();
    CHECK(rel_dev(recon_g(t), g0) <= 1e-12);
    CHECK(rel_dev(recon_h(t), h0) <= 1e-12);
    CHECK(rel_dev(recon_a(t), a0) <= 1e-12);
    CHECK(t.rank_g == app.rank_g);
    CHECK(t.lG.role_width(SegRole::kG2) == app.rank_g);
    CHECK(t.lH.role_width(SegRole::kH2) == app.rank_h);
  }

  SUBCASE("tau = 1e-8 perturbs the iterate by at most 1e-6 relative") {
    FsdaState t = s;
    cfg.tau_g = 1e-8;
    cfg.tau_h = 1e-8;
    const Eigen::MatrixXd g0 = recon_g(t), h0 = recon_h(t), a0 = recon_a(t);
    apply_ptc(t, cfg);
    t.check();
    CHECK(rel_dev(recon_g(t), g0) <= 1e-6);
    CHECK(rel_dev(recon_h(t), h0) <= 1e-6);
    CHECK(rel_dev(recon_a(t), a0) <= 1e-6);
  }

  SUBCASE("the rank cap forces a hard cut") {
    FsdaState t = s;
    cfg.m_max = 3;
    const PtcApplication app = apply_ptc(t, cfg);
    t.check();
    CHECK(app.rank_g == 3);
    CHECK(app.hard_cut_g);
    CHECK(t.lG.role_width(SegRole::kG2) == 3);
  }

  SUBCASE("the compressed block is shared bitwise and stable") {
    FsdaState t = s;
    apply_ptc(t, cfg);
    const int ig = t.lG.find_role(SegRole::kG2);
    const int ia = t.lA1.find_role(SegRole::kG2);
    REQUIRE(ig >= 0);
    REQUIRE(ia >= 0);
    CHECK((t.lG.view(ig) - t.lA1.view(ia)).norm() == 0.0);

    // Compressing an already orthonormal block changes nothing material.
    FsdaState t2 = t;
    const Eigen::MatrixXd g0 = recon_g(t2);
    const PtcApplication again = apply_ptc(t2, cfg);
    CHECK(again.rank_g == t.rank_g);
    CHECK(rel_dev(recon_g(t2), g0) <= 1e-13);
  }
}

TEST_CASE("the monitor deletes settled tails and they behave as chained") {
  const DareProblem p = gen_instance(32, 2, 2, 0.6, 13);
  SolverConfig cfg = exact_config(32);
  cfg.tau_g = 1e-8;
  cfg.tau_h = 1e-8;
  FsdaState s = init_state(p, cfg);
  advance(s, cfg);  // k = 2, all four trailing segments alive

  SUBCASE("a tiny G3 is removed and reborn one step later") {
    FsdaState t = s;
    const int i3 = t.lG.find_role(SegRole::kG3);
    REQUIRE(i3 >= 0);
    const int w = t.lG.segments()[i3].width;
    t.lG.replace_segment(i3, Eigen::MatrixXd::Constant(32, w, 1e-18));
    const MonitorReport rep = monitor_prune(t, cfg);
    CHECK(rep.deleted_g3);
    CHECK_FALSE(rep.deleted_a2_tail);
    CHECK(t.lG.find_role(SegRole::kG3) == -1);
    CHECK(t.kG.rows() == t.mg());
    t.check();

    // The A2 tail is still alive, so the next doubling rebuilds a G3.
    advance(t, cfg);
    CHECK(t.lG.find_role(SegRole::kG3) >= 0);
    CHECK(t.lG.role_width(SegRole::kG3) == t.ma);
  }

  SUBCASE("a deleted A2 tail never comes back and stops feeding G3") {
    FsdaState t = s;
    const int it2 = t.lA2.find_role(SegRole::kA2Tail);
    REQUIRE(it2 >= 0);
    const int w = t.lA2.segments()[it2].width;
    t.lA2.replace_segment(it2, Eigen::MatrixXd::Constant(32, w, 1e-18));
    const MonitorReport rep = monitor_prune(t, cfg);
    CHECK(rep.deleted_a2_tail);
    CHECK(t.lA2.find_role(SegRole::kA2Tail) == -1);
    CHECK(t.kA.cols() == t.ma2());
    t.check();

    advance(t, cfg, /*compress=*/false);
    CHECK(t.lG.find_role(SegRole::kG3) == -1);
    CHECK(t.lA2.find_role(SegRole::kA2Tail) == -1);
    t.check();
  }

  SUBCASE("settled head entries are pruned at the zero threshold") {
    FsdaState t = s;
    cfg.tol = 1e-15;
    const int ih = t.lG.find_role(SegRole::kG1);
    REQUIRE(ih >= 0);
    Eigen::MatrixXd head = t.lG.view(ih);
    head(0, 0) = 1e-20;
    t.lG.replace_segment(ih, head);
    monitor_prune(t, cfg);
    CHECK(t.lG.view(ih)(0, 0) == 0.0);
  }
}
