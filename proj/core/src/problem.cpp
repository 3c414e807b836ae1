// SPDX-License-Identifier: MIT
#include "fsda/problem.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "fsda/dense_oracle.hpp"
#include "fsda/errors.hpp"
#include "fsda/mm_io.hpp"
#include "kv_util.hpp"

namespace fsda {

Eigen::MatrixXd DareProblem::dense_a() const {
  Eigen::MatrixXd a = dA0.dense();
  if (lA10.cols() > 0) {
    a.noalias() += lA10.data() * lA20.data().transpose();
  }
  return a;
}

void DareProblem::check() const {
  const int nn = n();
  if (nn <= 0) throw FsdaError("problem has no dimension");
  if (dG0.n() != nn || dH0.n() != nn || lA10.n() != nn || lA20.n() != nn) {
    throw FsdaError("problem parts disagree on the dimension");
  }
  if (lA10.cols() != lA20.cols()) {
    throw FsdaError("low-rank factors have different column counts");
  }
  const auto check_symmetric = [](const BandedMatrix& d, const char* name) {
    const double scale = 1.0 + d.max_abs();
    for (int o = 1; o <= d.half_bw(); ++o) {
      const int lo = o;
      const int hi = d.n() - 1;
      for (int j = lo; j <= hi; ++j) {
        const double dev = std::abs(d(j - o, j) - d(j, j - o));
        if (dev > 1e-12 * scale) {
          throw FsdaError(std::string(name) + " is not symmetric");
        }
      }
    }
  };
  check_symmetric(dG0, "dG0");
  check_symmetric(dH0, "dH0");
}

namespace {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  /// Uniform double in [0, 1) with 53 random bits; identical on every
  /// platform (the standard distributions are not).
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::mt19937_64 gen_;
};

BandedMatrix random_band(Rng& rng, int n, int band) {
  BandedMatrix m(n, band, band);
  for (int o = -band; o <= band; ++o) {
    for (double& v : m.diagonal(o)) v = rng.uniform(-1.0, 1.0);
  }
  return m;
}

/// Largest |eigenvalue| estimate that is exact at desk scale and falls back
/// to a fixed-iteration power method on A^T A (a norm estimate, good enough
/// to scale with) above it.
double radius_estimate(const BandedMatrix& m) {
  if (m.n() <= 256) return spectral_radius(m.dense());
  Eigen::VectorXd v = Eigen::VectorXd::Ones(m.n()).normalized();
  double lambda = 0.0;
  for (int it = 0; it < 50; ++it) {
    Eigen::MatrixXd av = band_apply(m, v);
    Eigen::MatrixXd atav = band_apply(m.transposed(), av);
    lambda = std::sqrt(atav.norm());
    if (lambda == 0.0) return 0.0;
    v = atav / atav.norm();
  }
  return lambda;
}

}  // namespace

DareProblem gen_instance(int n, int band, int m_a, double rho_target,
                         std::uint64_t seed, GenReport* report) {
  if (n <= 0 || band < 0 || band >= n || m_a < 0 || rho_target <= 0.0 ||
      rho_target >= 1.0) {
    throw FsdaError("gen_instance: invalid shape or spectral target");
  }
  GenReport rep;
  for (int attempt = 0; attempt < 10; ++attempt) {
    rep.attempts = attempt + 1;
    // Distinct, reproducible stream per attempt.
    Rng rng(seed + 0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(attempt));

    DareProblem p;
    p.meta = {n, band, m_a, seed, rho_target};
    p.dA0 = random_band(rng, n, band);
    const double rho = radius_estimate(p.dA0);
    if (rho > 0.0) p.dA0.scale(rho_target / rho);

    Eigen::MatrixXd l1(n, m_a), l2(n, m_a);
    for (int j = 0; j < m_a; ++j) {
      for (int i = 0; i < n; ++i) l1(i, j) = rng.uniform(-1.0, 1.0);
      for (int i = 0; i < n; ++i) l2(i, j) = rng.uniform(-1.0, 1.0);
      l1.col(j) *= 0.1 / l1.col(j).norm();
      l2.col(j) *= 0.1 / l2.col(j).norm();
    }
    p.lA10 = m_a > 0 ? TallFactor(l1, Segment{m_a, SegRole::kR, 0})
                     : TallFactor(n);
    p.lA20 = m_a > 0 ? TallFactor(l2, Segment{m_a, SegRole::kR, 0})
                     : TallFactor(n);

    const auto spd_band = [&rng, n, band]() {
      BandedMatrix b(n, band, 0);
      for (double& v : b.diagonal(0)) v = rng.uniform(0.5, 1.5);
      for (int o = 1; o <= band; ++o) {
        for (double& v : b.diagonal(-o)) v = rng.uniform(-0.5, 0.5);
      }
      return band_mul(b, b.transposed(), 0.0);
    };
    p.dG0 = spd_band();
    p.dH0 = spd_band();

    if (n <= 256) {
      const ConvergenceReport cr =
          convergence_report(p.dense_a(), p.dG0.dense(), p.dH0.dense());
      rep.rho_s = cr.rho_s;
      rep.rho_t = cr.rho_t;
      rep.validated = true;
      if (!cr.converged()) continue;
    } else {
      rep.validated = false;
    }
    if (report != nullptr) *report = rep;
    return p;
  }
  throw FsdaError(
      "gen_instance: no stable instance in 10 attempts (seed " +
      std::to_string(seed) + ", target " + std::to_string(rho_target) + ")");
}

void write_bundle(const DareProblem& p, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  {
    std::ofstream meta(dir + "/meta");
    if (!meta) throw FsdaError("cannot write '" + dir + "/meta'");
    meta << "n=" << p.meta.n << "\n"
         << "band=" << p.meta.band << "\n"
         << "m_a=" << p.meta.m_a << "\n"
         << "seed=" << p.meta.seed << "\n"
         << "rho_target=" << detail::fmt17(p.meta.rho_target) << "\n";
  }
  write_matrix_market(p.dA0, dir + "/DA.mtx");
  write_matrix_market(p.dG0, dir + "/DG.mtx", /*symmetric=*/true);
  write_matrix_market(p.dH0, dir + "/DH.mtx", /*symmetric=*/true);
  write_talf(p.lA10, dir + "/LA1.talf");
  write_talf(p.lA20, dir + "/LA2.talf");
}

DareProblem read_bundle(const std::string& dir) {
  DareProblem p;
  const std::string meta_path = dir + "/meta";
  for (const auto& [key, value] : detail::read_kv(meta_path)) {
    if (key == "n") {
      p.meta.n = static_cast<int>(detail::parse_int(value, meta_path));
    } else if (key == "band") {
      p.meta.band = static_cast<int>(detail::parse_int(value, meta_path));
    } else if (key == "m_a") {
      p.meta.m_a = static_cast<int>(detail::parse_int(value, meta_path));
    } else if (key == "seed") {
      p.meta.seed = static_cast<std::uint64_t>(detail::parse_int(value, meta_path));
    } else if (key == "rho_target") {
      p.meta.rho_target = detail::parse_double(value, meta_path);
    } else {
      throw ParseError(meta_path, "unknown key '" + key + "'");
    }
  }
  p.dA0 = read_matrix_market(dir + "/DA.mtx");
  p.dG0 = read_matrix_market(dir + "/DG.mtx");
  p.dH0 = read_matrix_market(dir + "/DH.mtx");
  p.lA10 = read_talf(dir + "/LA1.talf");
  p.lA20 = read_talf(dir + "/LA2.talf");
  p.check();
  return p;
}

}  // namespace fsda
