// SPDX-License-Identifier: MIT
//
// Microbenchmarks for the banded kernels and one full structured doubling
// advance, with a dense doubling step for contrast.  Times are dominated by
// the band products, which is what the factored iteration is built around.

#include <benchmark/benchmark.h>

#include <random>

#include "fsda/dense_oracle.hpp"
#include "fsda/reduction.hpp"
#include "fsda/solver.hpp"

namespace {

fsda::DareProblem instance(int n, int band, int ma) {
  return fsda::gen_instance(n, band, ma, 0.6, 42);
}

void BM_BandMul(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const fsda::DareProblem p = instance(n, 2, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fsda::band_mul(p.dG0, p.dH0, 1e-15));
  }
}
BENCHMARK(BM_BandMul)->Arg(512)->Arg(2048)->Arg(8192)
    ->Unit(benchmark::kMicrosecond);

void BM_BandSolve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const fsda::DareProblem p = instance(n, 2, 1);
  const fsda::BandedMatrix w =
      fsda::band_add(fsda::BandedMatrix::identity(n),
                     fsda::band_mul(p.dG0, p.dH0, 0.0));
  const Eigen::MatrixXd rhs = Eigen::MatrixXd::Identity(n, 8);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fsda::band_solve(w, rhs));
  }
}
BENCHMARK(BM_BandSolve)->Arg(512)->Arg(2048)->Arg(8192)
    ->Unit(benchmark::kMicrosecond);

void BM_BandInvApprox(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const fsda::DareProblem p = instance(n, 2, 1);
  const fsda::BandedMatrix w =
      fsda::band_add(fsda::BandedMatrix::identity(n),
                     fsda::band_mul(p.dG0, p.dH0, 0.0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(fsda::band_inv_approx(w, 1e-15, 16));
  }
}
BENCHMARK(BM_BandInvApprox)->Arg(512)->Arg(2048)
    ->Unit(benchmark::kMillisecond);

void BM_PtcQr(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Eigen::MatrixXd block(n, 48);
  std::mt19937_64 gen(7);
  for (int j = 0; j < block.cols(); ++j) {
    for (int i = 0; i < n; ++i) {
      block(i, j) = static_cast<double>(gen() >> 11) * 0x1.0p-53 - 0.5;
    }
    // Make trailing columns nearly dependent so the cut has work to do.
    if (j >= 8) block.col(j) = 0.9 * block.col(j - 8) + 1e-6 * block.col(j);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(fsda::ptc_qr(block, 1e-12, 40));
  }
}
BENCHMARK(BM_PtcQr)->Arg(1024)->Arg(4096)->Unit(benchmark::kMicrosecond);

void BM_FsdaAdvance(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const fsda::DareProblem p = instance(n, 2, 2);
  fsda::SolverConfig cfg;
  fsda::FsdaState s = fsda::init_state(p, cfg);
  {
    // Advance once so the factors have realistic widths.
    const fsda::BandedStep bs = fsda::banded_step(s, cfg);
    const fsda::ThetaSet th = fsda::compute_thetas(s, bs.helpers);
    const fsda::KernelComponents kc = fsda::kernel_components(s, th);
    s = fsda::assemble_next(s, bs, kc);
    fsda::apply_ptc(s, cfg);
    fsda::monitor_prune(s, cfg);
  }
  for (auto _ : state) {
    const fsda::BandedStep bs = fsda::banded_step(s, cfg);
    const fsda::ThetaSet th = fsda::compute_thetas(s, bs.helpers);
    const fsda::KernelComponents kc = fsda::kernel_components(s, th);
    fsda::FsdaState next = fsda::assemble_next(s, bs, kc);
    fsda::apply_ptc(next, cfg);
    benchmark::DoNotOptimize(next);
  }
}
BENCHMARK(BM_FsdaAdvance)->Arg(512)->Arg(2048)->Arg(8192)
    ->Unit(benchmark::kMillisecond);

void BM_DenseSdaStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const fsda::DareProblem p = instance(n, 2, 2);
  const Eigen::MatrixXd a = p.dense_a();
  const Eigen::MatrixXd g = p.dG0.dense();
  const Eigen::MatrixXd h = p.dH0.dense();
  for (auto _ : state) {
    benchmark::DoNotOptimize(fsda::dense_sda(a, g, h, 1));
  }
}
BENCHMARK(BM_DenseSdaStep)->Arg(512)->Arg(2048)
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
