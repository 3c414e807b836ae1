// SPDX-License-Identifier: MIT
#include <cstdio>
#include <doctest.h>
#include <filesystem>
#include <string>

#include "fsda/config.hpp"
#include "fsda/dense_oracle.hpp"
#include "fsda/errors.hpp"
#include "fsda/problem.hpp"

using namespace fsda;

namespace {

std::filesystem::path temp_dir(const char* name) {
  auto p = std::filesystem::temp_directory_path() / name;
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("generation is deterministic in the seed") {
  const DareProblem a = gen_instance(24, 2, 2, 0.6, 123);
  const DareProblem b = gen_instance(24, 2, 2, 0.6, 123);
  CHECK((a.dA0.dense() - b.dA0.dense()).norm() == 0.0);
  CHECK((a.dG0.dense() - b.dG0.dense()).norm() == 0.0);
  CHECK((a.dH0.dense() - b.dH0.dense()).norm() == 0.0);
  CHECK((a.lA10.data() - b.lA10.data()).norm() == 0.0);
  CHECK((a.lA20.data() - b.lA20.data()).norm() == 0.0);

  const DareProblem c = gen_instance(24, 2, 2, 0.6, 124);
  CHECK((a.dA0.dense() - c.dA0.dense()).norm() > 0.0);
}

TEST_CASE("generated instances carry their certificates") {
  GenReport rep;
  const DareProblem p = gen_instance(40, 2, 2, 0.65, 7, &rep);
  p.check();
  CHECK(rep.validated);
  CHECK(rep.rho_s < 1.0);
  CHECK(rep.rho_t < 1.0);
  CHECK(rep.attempts >= 1);

  // The banded part is scaled to the requested spectral radius, and the
  // low-rank columns carry the agreed norm.
  CHECK(spectral_radius(p.dA0.dense()) == doctest::Approx(0.65).epsilon(1e-8));
  for (int j = 0; j < p.lA10.cols(); ++j) {
    CHECK(p.lA10.data().col(j).norm() == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(p.lA20.data().col(j).norm() == doctest::Approx(0.1).epsilon(1e-12));
  }
  CHECK(p.meta.n == 40);
  CHECK(p.meta.seed == 7);

  // G and H are symmetric positive definite.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eg(p.dG0.dense());
  CHECK(eg.eigenvalues().minCoeff() > 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eh(p.dH0.dense());
  CHECK(eh.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("bad generator arguments are rejected") {
  CHECK_THROWS_AS(gen_instance(0, 1, 1, 0.6, 1), FsdaError);
  CHECK_THROWS_AS(gen_instance(16, 16, 1, 0.6, 1), FsdaError);
  CHECK_THROWS_AS(gen_instance(16, -1, 1, 0.6, 1), FsdaError);
  CHECK_THROWS_AS(gen_instance(16, 2, -1, 0.6, 1), FsdaError);
  CHECK_THROWS_AS(gen_instance(16, 2, 1, 1.5, 1), FsdaError);
  CHECK_THROWS_AS(gen_instance(16, 2, 1, 0.0, 1), FsdaError);
}

TEST_CASE("problem bundles round trip bitwise") {
  const auto dir = temp_dir("fsda_test_bundle");
  const DareProblem p = gen_instance(28, 3, 2, 0.6, 55);
  write_bundle(p, dir.string());
  const DareProblem q = read_bundle(dir.string());
  q.check();
  CHECK(q.meta.n == p.meta.n);
  CHECK(q.meta.band == p.meta.band);
  CHECK(q.meta.m_a == p.meta.m_a);
  CHECK(q.meta.seed == p.meta.seed);
  CHECK(q.meta.rho_target == p.meta.rho_target);
  CHECK((q.dA0.dense() - p.dA0.dense()).norm() == 0.0);
  CHECK((q.dG0.dense() - p.dG0.dense()).norm() == 0.0);
  CHECK((q.dH0.dense() - p.dH0.dense()).norm() == 0.0);
  CHECK((q.lA10.data() - p.lA10.data()).norm() == 0.0);
  CHECK((q.lA20.data() - p.lA20.data()).norm() == 0.0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("reading a missing bundle names the path") {
  CHECK_THROWS_AS(read_bundle("/nonexistent/bundle"), ParseError);
  try {
    read_bundle("/nonexistent/bundle");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("/nonexistent/bundle") != std::string::npos);
  }
}

TEST_CASE("mismatched factor shapes fail the problem check") {
  DareProblem p = gen_instance(16, 2, 2, 0.6, 77);
  p.lA20 = TallFactor(Eigen::MatrixXd::Zero(16, 1), Segment{1, SegRole::kR, 0});
  CHECK_THROWS_AS(p.check(), FsdaError);
}

TEST_CASE("solver config files round trip") {
  const auto dir = temp_dir("fsda_test_config");
  const auto path = (dir / "solver.cfg").string();

  SolverConfig cfg;
  cfg.tol = 1e-14;
  cfg.tau_g = 3e-9;
  cfg.tau_h = 2e-9;
  cfg.tau_r = 1e-13;
  cfg.eps_b = 1e-9;
  cfg.eps_l = 2e-9;
  cfg.m_max = 64;
  cfg.max_iter = 17;
  cfg.band_drop = 1e-14;
  cfg.max_bw = 33;
  cfg.denominator = DenominatorMode::kGH;
  cfg.speculative = true;
  write_config(cfg, path);

  const SolverConfig back = read_config(path);
  CHECK(back.tol == cfg.tol);
  CHECK(back.tau_g == cfg.tau_g);
  CHECK(back.tau_h == cfg.tau_h);
  CHECK(back.tau_r == cfg.tau_r);
  CHECK(back.eps_b == cfg.eps_b);
  CHECK(back.eps_l == cfg.eps_l);
  CHECK(back.m_max == cfg.m_max);
  CHECK(back.max_iter == cfg.max_iter);
  CHECK(back.band_drop == cfg.band_drop);
  CHECK(back.max_bw == cfg.max_bw);
  CHECK(back.denominator == DenominatorMode::kGH);
  CHECK(back.speculative);
  std::filesystem::remove_all(dir);
}

TEST_CASE("unknown config keys are an error") {
  const auto dir = temp_dir("fsda_test_config_bad");
  const auto path = (dir / "bad.cfg").string();
  {
    std::FILE* f = std::fopen(path.c_str(), "w");
    REQUIRE(f != nullptr);
    std::fputs("tol = 1e-12\nmax_iters = 5\n", f);  // typo: max_iters
    std::fclose(f);
  }
  CHECK_THROWS_AS(read_config(path), ParseError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("config validation rejects nonsense") {
  SolverConfig cfg;
  cfg.max_iter = 0;
  CHECK_THROWS_AS(cfg.validate(), FsdaError);
  cfg = SolverConfig{};
  cfg.tau_g = -1.0;
  CHECK_THROWS_AS(cfg.validate(), FsdaError);
  cfg = SolverConfig{};
  cfg.m_max = -2;
  CHECK_THROWS_AS(cfg.validate(), FsdaError);

  // The resolution helpers implement the documented defaults.
  cfg = SolverConfig{};
  CHECK(cfg.resolve_m_max(2) == 80);
  CHECK(cfg.resolve_m_max(0) == 0);
  CHECK(cfg.resolve_max_bw(100, 2) == 16);
  CHECK(cfg.resolve_max_bw(9, 2) == 8);
  cfg.max_bw = 50;
  CHECK(cfg.resolve_max_bw(100, 2) == 50);
}
