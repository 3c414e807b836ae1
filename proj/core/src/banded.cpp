// SPDX-License-Identifier: MIT
#include "fsda/banded.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdlib>

#include "fsda/cost.hpp"
#include "fsda/errors.hpp"
#include "fsda/parallel.hpp"

namespace fsda {

BandedMatrix::BandedMatrix(int n, int lower_bw, int upper_bw, double drop_tol)
    : n_(n), lower_(lower_bw), upper_(upper_bw), drop_tol_(drop_tol) {
  assert(n >= 0);
  assert(lower_bw >= 0 && lower_bw <= std::max(0, n - 1));
  assert(upper_bw >= 0 && upper_bw <= std::max(0, n - 1));
  bands_.assign(static_cast<std::size_t>(lower_ + upper_ + 1) * n_, 0.0);
}

BandedMatrix BandedMatrix::identity(int n) {
  BandedMatrix m(n, 0, 0);
  auto d = m.diagonal(0);
  for (int j = 0; j < n; ++j) d[j] = 1.0;
  return m;
}

BandedMatrix BandedMatrix::zero(int n) { return BandedMatrix(n, 0, 0); }

BandedMatrix BandedMatrix::from_dense(const Eigen::MatrixXd& dense,
                                      double drop_tol) {
  assert(dense.rows() == dense.cols());
  const int n = static_cast<int>(dense.rows());
  int lower = 0;
  int upper = 0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (std::abs(dense(i, j)) > drop_tol) {
        lower = std::max(lower, i - j);
        upper = std::max(upper, j - i);
      }
    }
  }
  BandedMatrix m(n, lower, upper, drop_tol);
  for (int o = -lower; o <= upper; ++o) {
    auto d = m.diagonal(o);
    const int jlo = std::max(0, o);
    const int jhi = n - 1 + std::min(0, o);
    for (int j = jlo; j <= jhi; ++j) {
      const double v = dense(j - o, j);
      if (std::abs(v) > drop_tol) d[j] = v;
    }
  }
  return m;
}

double BandedMatrix::operator()(int i, int j) const {
  assert(i >= 0 && i < n_ && j >= 0 && j < n_);
  if (!in_band(i, j)) return 0.0;
  return bands_[static_cast<std::size_t>(row_of(j - i)) * n_ + j];
}

double& BandedMatrix::at(int i, int j) {
  assert(i >= 0 && i < n_ && j >= 0 && j < n_);
  assert(in_band(i, j) && "write outside the reserved band");
  return bands_[static_cast<std::size_t>(row_of(j - i)) * n_ + j];
}

bool BandedMatrix::in_band(int i, int j) const {
  const int o = j - i;
  return o >= -lower_ && o <= upper_;
}

std::span<double> BandedMatrix::diagonal(int offset) {
  assert(offset >= -lower_ && offset <= upper_);
  return {bands_.data() + static_cast<std::size_t>(row_of(offset)) * n_,
          static_cast<std::size_t>(n_)};
}

std::span<const double> BandedMatrix::diagonal(int offset) const {
  assert(offset >= -lower_ && offset <= upper_);
  return {bands_.data() + static_cast<std::size_t>(row_of(offset)) * n_,
          static_cast<std::size_t>(n_)};
}

Eigen::MatrixXd BandedMatrix::dense() const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n_, n_);
  for (int o = -lower_; o <= upper_; ++o) {
    auto d = diagonal(o);
    const int jlo = std::max(0, o);
    const int jhi = n_ - 1 + std::min(0, o);
    for (int j = jlo; j <= jhi; ++j) out(j - o, j) = d[j];
  }
  return out;
}

BandedMatrix BandedMatrix::transposed() const {
  BandedMatrix out(n_, upper_, lower_, drop_tol_);
  for (int o = -lower_; o <= upper_; ++o) {
    auto src = diagonal(o);
    auto dst = out.diagonal(-o);
    const int jlo = std::max(0, o);
    const int jhi = n_ - 1 + std::min(0, o);
    for (int j = jlo; j <= jhi; ++j) dst[j - o] = src[j];
  }
  return out;
}

void BandedMatrix::scale(double s) {
  for (double& v : bands_) v *= s;
}

void BandedMatrix::prune(double drop) {
  drop_tol_ = drop;
  for (double& v : bands_) {
    if (v != 0.0 && std::abs(v) <= drop) v = 0.0;
  }
  const auto all_zero = [this](int offset) {
    auto d = diagonal(offset);
    const int jlo = std::max(0, offset);
    const int jhi = n_ - 1 + std::min(0, offset);
    for (int j = jlo; j <= jhi; ++j) {
      if (d[j] != 0.0) return false;
    }
    return true;
  };
  int new_lower = lower_;
  int new_upper = upper_;
  while (new_lower > 0 && all_zero(-new_lower)) --new_lower;
  while (new_upper > 0 && all_zero(new_upper)) --new_upper;
  if (new_lower == lower_ && new_upper == upper_) return;
  BandedMatrix shrunk(n_, new_lower, new_upper, drop);
  for (int o = -new_lower; o <= new_upper; ++o) {
    auto src = diagonal(o);
    auto dst = shrunk.diagonal(o);
    std::copy(src.begin(), src.end(), dst.begin());
  }
  *this = std::move(shrunk);
}

double BandedMatrix::frobenius_norm() const {
  double sum = 0.0;
  for (double v : bands_) sum += v * v;
  return std::sqrt(sum);
}

double BandedMatrix::max_abs() const {
  double m = 0.0;
  for (double v : bands_) m = std::max(m, std::abs(v));
  return m;
}

std::int64_t BandedMatrix::stored_entries() const {
  std::int64_t count = 0;
  for (int o = -lower_; o <= upper_; ++o) count += n_ - std::abs(o);
  return std::max<std::int64_t>(count, 0);
}

namespace {

BandedMatrix band_add_impl(const BandedMatrix& a, const BandedMatrix& b,
                           double sign) {
  assert(a.n() == b.n());
  const int n = a.n();
  BandedMatrix out(n, std::max(a.lower_bw(), b.lower_bw()),
                   std::max(a.upper_bw(), b.upper_bw()),
                   std::max(a.drop_tol(), b.drop_tol()));
  if (n == 0) return out;
  for (int o = -out.lower_bw(); o <= out.upper_bw(); ++o) {
    auto dst = out.diagonal(o);
    const int jlo = std::max(0, o);
    const int jhi = n - 1 + std::min(0, o);
    if (o >= -a.lower_bw() && o <= a.upper_bw()) {
      auto da = a.diagonal(o);
      for (int j = jlo; j <= jhi; ++j) dst[j] += da[j];
    }
    if (o >= -b.lower_bw() && o <= b.upper_bw()) {
      auto db = b.diagonal(o);
      for (int j = jlo; j <= jhi; ++j) dst[j] += sign * db[j];
    }
  }
  return out;
}

}  // namespace

BandedMatrix band_add(const BandedMatrix& a, const BandedMatrix& b) {
  return band_add_impl(a, b, 1.0);
}

BandedMatrix band_sub(const BandedMatrix& a, const BandedMatrix& b) {
  return band_add_impl(a, b, -1.0);
}

BandedMatrix band_mul(const BandedMatrix& a, const BandedMatrix& b,
                      double drop) {
  assert(a.n() == b.n());
  const int n = a.n();
  if (n == 0) return BandedMatrix();
  const int lower = std::min(n - 1, a.lower_bw() + b.lower_bw());
  const int upper = std::min(n - 1, a.upper_bw() + b.upper_bw());
  BandedMatrix out(n, lower, upper, drop);
  std::int64_t macs = 0;
  for (int oa = -a.lower_bw(); oa <= a.upper_bw(); ++oa) {
    auto da = a.diagonal(oa);
    for (int ob = -b.lower_bw(); ob <= b.upper_bw(); ++ob) {
      const int oc = oa + ob;
      if (oc < -lower || oc > upper) continue;
      auto db = b.diagonal(ob);
      auto dc = out.diagonal(oc);
      // out(i, i+oc) += a(i, i+oa) * b(i+oa, i+oc); all three indices must
      // stay inside [0, n).
      const int ilo = std::max({0, -oa, -oc});
      const int ihi = std::min({n - 1, n - 1 - oa, n - 1 - oc});
      for (int i = ilo; i <= ihi; ++i) {
        dc[i + oc] += da[i + oa] * db[i + oc];
      }
      if (ihi >= ilo) macs += ihi - ilo + 1;
    }
  }
  cost::add(cost::Bucket::kBandMul, macs);
  out.prune(drop);
  return out;
}

Eigen::MatrixXd band_apply(const BandedMatrix& d, const Eigen::MatrixXd& tall) {
  assert(d.n() == tall.rows());
  const int n = d.n();
  const int cols = static_cast<int>(tall.cols());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, cols);
  if (n == 0 || cols == 0) return out;
  parallel_for(0, cols, [&](int clo, int chi) {
    for (int c = clo; c < chi; ++c) {
      const double* src = tall.col(c).data();
      double* dst = out.col(c).data();
      for (int o = -d.lower_bw(); o <= d.upper_bw(); ++o) {
        auto diag = d.diagonal(o);
        const int ilo = std::max(0, -o);
        const int ihi = n - 1 - std::max(0, o);
        for (int i = ilo; i <= ihi; ++i) {
          dst[i] += diag[i + o] * src[i + o];
        }
      }
    }
  });
  return out;
}

std::int64_t band_apply_macs(const BandedMatrix& d, int cols) {
  return d.stored_entries() * cols;
}

BandedLu::BandedLu(const BandedMatrix& m)
    : n_(m.n()), kl_(m.lower_bw()), ku_(m.upper_bw()) {
  work_ = Eigen::MatrixXd::Zero(2 * kl_ + ku_ + 1, n_);
  ipiv_.assign(n_, 0);
  const int shift = kl_ + ku_;  // storage row of (i, j) is shift + i - j
  for (int o = -kl_; o <= ku_; ++o) {
    auto d = m.diagonal(o);
    const int jlo = std::max(0, o);
    const int jhi = n_ - 1 + std::min(0, o);
    for (int j = jlo; j <= jhi; ++j) work_(shift - o, j) = d[j];
  }
  // Gaussian elimination with partial pivoting; fill stays within kl_ extra
  // superdiagonals, which the storage above reserves.
  for (int j = 0; j < n_; ++j) {
    const int km = std::min(kl_, n_ - 1 - j);
    int p = 0;
    double pmax = std::abs(work_(shift, j));
    for (int t = 1; t <= km; ++t) {
      const double v = std::abs(work_(shift + t, j));
      if (v > pmax) {
        pmax = v;
        p = t;
      }
    }
    if (pmax == 0.0 || !std::isfinite(pmax)) {
      throw SingularPivotError(j, work_(shift + p, j));
    }
    ipiv_[j] = j + p;
    const int jhi = std::min(n_ - 1, j + kl_ + ku_);
    if (p != 0) {
      for (int c = j; c <= jhi; ++c) {
        std::swap(work_(shift + j - c, c), work_(shift + j + p - c, c));
      }
    }
    const double piv = work_(shift, j);
    for (int t = 1; t <= km; ++t) work_(shift + t, j) /= piv;
    for (int c = j + 1; c <= jhi; ++c) {
      const double ujc = work_(shift + j - c, c);
      if (ujc == 0.0) continue;
      for (int t = 1; t <= km; ++t) {
        work_(shift + j + t - c, c) -= work_(shift + t, j) * ujc;
      }
    }
  }
}

Eigen::MatrixXd BandedLu::solve(const Eigen::MatrixXd& rhs) const {
  assert(rhs.rows() == n_);
  Eigen::MatrixXd x = rhs;
  const int shift = kl_ + ku_;
  const int cols = static_cast<int>(x.cols());
  if (cols == 0 || n_ == 0) return x;
  parallel_for(0, cols, [&](int clo, int chi) {
    for (int c = clo; c < chi; ++c) {
      double* v = x.col(c).data();
      // Forward pass: apply row interchanges and the stored multipliers.
      for (int j = 0; j < n_; ++j) {
        if (ipiv_[j] != j) std::swap(v[j], v[ipiv_[j]]);
        const int km = std::min(kl_, n_ - 1 - j);
        const double vj = v[j];
        if (vj == 0.0) continue;
        for (int t = 1; t <= km; ++t) v[j + t] -= work_(shift + t, j) * vj;
      }
      // Back substitution on U (bandwidth kl_ + ku_).
      for (int j = n_ - 1; j >= 0; --j) {
        const int chi_col = std::min(n_ - 1, j + kl_ + ku_);
        double acc = v[j];
        for (int col = j + 1; col <= chi_col; ++col) {
          acc -= work_(shift + j - col, col) * v[col];
        }
        v[j] = acc / work_(shift, j);
      }
    }
  });
  cost::add(cost::Bucket::kBandMul,
            static_cast<std::int64_t>(n_) * (2 * kl_ + ku_ + 1) * cols);
  return x;
}

Eigen::MatrixXd band_solve(const BandedMatrix& m, const Eigen::MatrixXd& rhs) {
  return BandedLu(m).solve(rhs);
}

BandedMatrix band_inv_approx(const BandedMatrix& m, double drop, int max_bw,
                             BandInvDiag* diag) {
  const int n = m.n();
  if (n == 0) return BandedMatrix();
  max_bw = std::clamp(max_bw, 0, n - 1);
  BandedLu lu(m);
  BandedMatrix out(n, max_bw, max_bw, drop);
  BandInvDiag local;
  constexpr int kBlock = 64;
  for (int c0 = 0; c0 < n; c0 += kBlock) {
    const int width = std::min(kBlock, n - c0);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, width);
    for (int c = 0; c < width; ++c) rhs(c0 + c, c) = 1.0;
    const Eigen::MatrixXd x = lu.solve(rhs);
    for (int c = 0; c < width; ++c) {
      const int j = c0 + c;
      for (int i = 0; i < n; ++i) {
        const double v = x(i, c);
        if (std::abs(v) <= drop) continue;
        if (std::abs(i - j) <= max_bw) {
          out.at(i, j) = v;
        } else {
          local.clipped = true;
          local.clipped_above_drop =
              std::max(local.clipped_above_drop, std::abs(v));
        }
      }
    }
  }
  out.prune(drop);
  if (diag) {
    BandedMatrix residual = band_sub(band_mul(m, out, 0.0),
                                     BandedMatrix::identity(n));
    local.residual_max = residual.max_abs();
    *diag = local;
  }
  return out;
}

HelperSet make_gh_helpers(const BandedMatrix& da, const BandedMatrix& dg,
                          const BandedMatrix& dh, double drop, int max_bw,
                          BandInvDiag* diag) {
  assert(da.n() == dg.n() && da.n() == dh.n());
  const int n = da.n();
  const BandedMatrix eye = BandedMatrix::identity(n);
  BandInvDiag d1, d2;
  HelperSet h;
  h.gh = band_inv_approx(band_add(eye, band_mul(dg, dh, drop)), drop, max_bw,
                         diag ? &d1 : nullptr);
  h.hg = band_inv_approx(band_add(eye, band_mul(dh, dg, drop)), drop, max_bw,
                         diag ? &d2 : nullptr);
  h.ghg = band_mul(h.gh, dg, drop);
  h.hgh = band_mul(h.hg, dh, drop);
  h.agh = band_mul(da, h.gh, drop);
  h.aghg = band_mul(da, h.ghg, drop);
  const BandedMatrix dat = da.transposed();
  h.athg = band_mul(dat, h.hg, drop);
  h.athgh = band_mul(dat, h.hgh, drop);
  if (diag) {
    diag->clipped = d1.clipped || d2.clipped;
    diag->clipped_above_drop =
        std::max(d1.clipped_above_drop, d2.clipped_above_drop);
    diag->residual_max = std::max(d1.residual_max, d2.residual_max);
  }
#ifndef NDEBUG
  {
    // hgh can be formed on either side of the inverse; the two must agree.
    const BandedMatrix alt = band_mul(dh, h.gh, 0.0);
    const double scale = 1.0 + h.hgh.frobenius_norm();
    const double tol = std::max(1e-12, 1e4 * drop) * scale;
    assert(band_sub(h.hgh, alt).frobenius_norm() <= tol &&
           "inconsistent (I + D^H D^G)^-1 D^H helper");
  }
#endif
  return h;
}

}  // namespace fsda
