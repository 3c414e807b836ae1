// SPDX-License-Identifier: MIT
#include <Eigen/Dense>
#include <doctest.h>

#include "fsda/dense_oracle.hpp"
#include "fsda/errors.hpp"
#include "fsda/engine.hpp"
#include "fsda/problem.hpp"
#include "test_util.hpp"

using namespace fsda;
using namespace fsda::test;

TEST_CASE("first iterate matches one dense doubling step") {
  const DareProblem p = gen_instance(24, 2, 2, 0.6, 5);
  const SolverConfig cfg = exact_config(24);
  FsdaState s = init_state(p, cfg);
  s.check();
  CHECK(s.k == 1);
  CHECK(s.ma == 2);
  CHECK(s.rank_g == 2);
  CHECK(s.rank_h == 2);

  const DenseIterates it =
      dense_sda(p.dense_a(), p.dG0.dense(), p.dH0.dense(), 1);
  CHECK(rel_dev(recon_a(s), it.a[1]) <= 1e-12);
  CHECK(rel_dev(recon_g(s), it.g[1]) <= 1e-12);
  CHECK(rel_dev(recon_h(s), it.h[1]) <= 1e-12);

  // Ledger layout at k = 1: the G factor is [G2 | G3], the A1 factor is
  // [G2 | tail] sharing the middle block bitwise; H is mirrored.
  REQUIRE(s.lG.segments().size() == 2);
  CHECK(s.lG.segments()[0].role == SegRole::kG2);
  CHECK(s.lG.segments()[1].role == SegRole::kG3);
  REQUIRE(s.lA1.segments().size() == 2);
  CHECK(s.lA1.segments()[0].role == SegRole::kG2);
  CHECK(s.lA1.segments()[1].role == SegRole::kA1Tail);
  CHECK((s.lG.view(0) - s.lA1.view(0)).norm() == 0.0);
  REQUIRE(s.lH.segments().size() == 2);
  CHECK(s.lH.segments()[0].role == SegRole::kH2);
  CHECK(s.lH.segments()[1].role == SegRole::kH3);
  CHECK((s.lH.view(0) - s.lA2.view(0)).norm() == 0.0);

  // The corner kernels at k = 1: [[theta, I], [I, 0]].
  CHECK(s.kG.data().rows() == 4);
  CHECK((s.kG.data().topRightCorner(2, 2) -
         Eigen::MatrixXd::Identity(2, 2)).norm() == 0.0);
  CHECK(s.kG.data().bottomRightCorner(2, 2).norm() == 0.0);
}

TEST_CASE("six structured doublings track the dense recurrence") {
  const DareProblem p = gen_instance(32, 2, 2, 0.6, 17);
  const SolverConfig cfg = exact_config(32);
  const DenseIterates it =
      dense_sda(p.dense_a(), p.dG0.dense(), p.dH0.dense(), 6);

  FsdaState s = init_state(p, cfg);
  for (int k = 1; k <= 6; ++k) {
    CHECK(rel_dev(recon_a(s), it.a[k]) <= 1e-10);
    CHECK(rel_dev(recon_g(s), it.g[k]) <= 1e-10);
    CHECK(rel_dev(recon_h(s), it.h[k]) <= 1e-10);
    s.check();
    if (k < 6) advance(s, cfg);
  }
}

TEST_CASE("deflated assembly equals the merged undeflated assembly") {
  const DareProblem p = gen_instance(28, 1, 2, 0.6, 23);
  const SolverConfig cfg = exact_config(28);
  FsdaState s = init_state(p, cfg);

  for (int step = 0; step < 3; ++step) {
    const BandedStep bs = banded_step(s, cfg);
    const ThetaSet th = compute_thetas(s, bs.helpers);
    const KernelComponents kc = kernel_components(s, th);
    const FsdaState defl = assemble_next(s, bs, kc);
    const UndeflatedAdvance und = assemble_next_undeflated(s, bs, kc);

    // The duplicate column blocks really are duplicates.
    CHECK(column_merge_deviation(und.lG.data(), und.g_moves) == 0.0);
    CHECK(column_merge_deviation(und.lH.data(), und.h_moves) == 0.0);
    CHECK(column_merge_deviation(und.lA1.data(), und.a1_row_moves) == 0.0);
    CHECK(column_merge_deviation(und.lA2.data(), und.a2_col_moves) == 0.0);

    // Merging them reproduces the production layout exactly.
    const auto [mlG, mkG] = merge_columns(und.lG, und.kG, und.g_moves);
    CHECK((mlG.data() - defl.lG.data()).norm() == 0.0);
    CHECK((mkG.data() - defl.kG.data()).norm() == 0.0);
    const auto [mlH, mkH] = merge_columns(und.lH, und.kH, und.h_moves);
    CHECK((mlH.data() - defl.lH.data()).norm() == 0.0);
    CHECK((mkH.data() - defl.kH.data()).norm() == 0.0);
    const TallFactor mlA1 = drop_columns(und.lA1, und.a1_row_moves);
    const TallFactor mlA2 = drop_columns(und.lA2, und.a2_col_moves);
    const Eigen::MatrixXd mkA = merge_cols_sum(
        merge_rows_sum(und.kA.data(), und.a1_row_moves), und.a2_col_moves);
    CHECK((mlA1.data() - defl.lA1.data()).norm() == 0.0);
    CHECK((mlA2.data() - defl.lA2.data()).norm() == 0.0);
    CHECK((mkA - defl.kA.data()).norm() == 0.0);

    // Both recover the same matrices.
    const Eigen::MatrixXd gu =
        reconstruct(defl.dG, und.lG, und.kG.data());
    CHECK(rel_dev(gu, recon_g(defl)) <= 1e-13);
    const Eigen::MatrixXd au =
        reconstruct(defl.dA, und.lA1, und.kA.data(), und.lA2);
    CHECK(rel_dev(au, recon_a(defl)) <= 1e-13);

    s = defl;
    apply_ptc(s, cfg);
    monitor_prune(s, cfg);
  }
}

TEST_CASE("theta matrices have the expected symmetry") {
  const DareProblem p = gen_instance(20, 2, 1, 0.6, 31);
  const SolverConfig cfg = exact_config(20);
  FsdaState s = init_state(p, cfg);
  advance(s, cfg);
  const BandedStep bs = banded_step(s, cfg);
  const ThetaSet th = compute_thetas(s, bs.helpers);
  CHECK((th.h - th.h.transpose()).norm() <= 1e-12 * (1.0 + th.h.norm()));
  CHECK((th.g - th.g.transpose()).norm() <= 1e-12 * (1.0 + th.g.norm()));
  CHECK((th.a1 - th.a1.transpose()).norm() <= 1e-12 * (1.0 + th.a1.norm()));
  CHECK((th.a2 - th.a2.transpose()).norm() <= 1e-12 * (1.0 + th.a2.norm()));
}

TEST_CASE("a purely banded problem runs with empty factors") {
  const DareProblem p = gen_instance(24, 2, 0, 0.6, 41);
  CHECK(p.lA10.cols() == 0);
  const SolverConfig cfg = exact_config(24);
  const DenseIterates it =
      dense_sda(p.dense_a(), p.dG0.dense(), p.dH0.dense(), 4);

  FsdaState s = init_state(p, cfg);
  CHECK(s.mg() == 0);
  CHECK(s.ma1() == 0);
  for (int k = 1; k <= 4; ++k) {
    CHECK(rel_dev(s.dA.dense(), it.a[k]) <= 1e-11);
    CHECK(rel_dev(s.dG.dense(), it.g[k]) <= 1e-11);
    CHECK(rel_dev(s.dH.dense(), it.h[k]) <= 1e-11);
    if (k < 4) advance(s, cfg);
  }
}

TEST_CASE("a singular coupled middle system raises a breakdown") {
  // Hand-built tiny state: with theta_hg = 1 and kernels kG = 1, kH = -1
  // the coupled system is [[1, 1], [1, 1]], which is exactly singular.
  const int n = 4;
  FsdaState s;
  s.k = 3;
  s.ma = 1;
  s.max_bw = n - 1;
  s.dA = BandedMatrix::identity(n);
  s.dG = BandedMatrix::identity(n);
  s.dH = BandedMatrix::identity(n);
  s.lG = TallFactor(Eigen::MatrixXd::Ones(n, 1), Segment{1, SegRole::kG2, 1});
  s.lH = TallFactor(Eigen::MatrixXd::Ones(n, 1), Segment{1, SegRole::kH2, 1});
  s.lA1 = TallFactor(n);
  s.lA2 = TallFactor(n);
  s.kG = BlockKernel::square(Eigen::MatrixXd::Constant(1, 1, 1.0), {1});
  s.kH = BlockKernel::square(Eigen::MatrixXd::Constant(1, 1, -1.0), {1});
  s.kA = BlockKernel(Eigen::MatrixXd(0, 0), {}, {});

  ThetaSet th;
  th.h = Eigen::MatrixXd::Zero(1, 1);
  th.g = Eigen::MatrixXd::Zero(1, 1);
  th.hg = Eigen::MatrixXd::Ones(1, 1);

  CHECK_THROWS_AS(kernel_components(s, th), BreakdownError);
  try {
    kernel_components(s, th);
  } catch (const BreakdownError& e) {
    CHECK(std::string(e.what()).find("singular") != std::string::npos);
  }
}
