// SPDX-License-Identifier: MIT
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fsda {

/// Square matrix stored by diagonals.
///
/// Diagonal offset o = column - row runs from -lower_bw() to upper_bw().
/// Each diagonal is one contiguous row of the storage array, indexed by
/// column, so the inner loops of the band products walk stride-1 memory.
/// Entries outside the band are an implicit exact zero.
///
/// The doubling iterates this library manipulates are not exactly banded,
/// but their entries decay away from the diagonal; every product therefore
/// carries a drop tolerance below which entries are discarded, and the
/// matrix remembers the last tolerance it was assembled with.
class BandedMatrix {
 public:
  /// Empty 0 x 0 matrix.
  BandedMatrix() = default;

  /// Zero matrix with the given bandwidths reserved.
  BandedMatrix(int n, int lower_bw, int upper_bw, double drop_tol = 0.0);

  static BandedMatrix identity(int n);
  static BandedMatrix zero(int n);

  /// Captures every entry of `dense` with |value| > drop_tol; bandwidths are
  /// the tightest that contain them.
  static BandedMatrix from_dense(const Eigen::MatrixXd& dense,
                                 double drop_tol = 0.0);

  int n() const { return n_; }
  int lower_bw() const { return lower_; }
  int upper_bw() const { return upper_; }
  /// Half-bandwidth in the symmetric sense: max(lower_bw, upper_bw).
  int half_bw() const { return lower_ > upper_ ? lower_ : upper_; }
  double drop_tol() const { return drop_tol_; }

  /// Value at (i, j); exact zero outside the band.
  double operator()(int i, int j) const;
  /// Mutable access; (i, j) must lie inside the band.
  double& at(int i, int j);
  bool in_band(int i, int j) const;

  /// Contiguous storage of one diagonal, indexed by column j; valid entries
  /// occupy j in [max(0, o), n-1 + min(0, o)].
  std::span<double> diagonal(int offset);
  std::span<const double> diagonal(int offset) const;

  Eigen::MatrixXd dense() const;
  BandedMatrix transposed() const;

  void scale(double s);
  /// Zeroes every stored entry with |value| <= drop and shrinks the
  /// bandwidths past all-zero outer diagonals.  Records drop as drop_tol().
  void prune(double drop);

  double frobenius_norm() const;
  double max_abs() const;
  /// Number of stored positions (including stored zeros inside the band).
  std::int64_t stored_entries() const;
  bool empty() const { return n_ == 0; }

 private:
  int row_of(int offset) const { return upper_ - offset; }

  int n_ = 0;
  int lower_ = 0;
  int upper_ = 0;
  double drop_tol_ = 0.0;
  // (lower_ + upper_ + 1) rows of length n_; row r holds diagonal
  // offset upper_ - r, entry (j - o, j) at position r * n_ + j.
  std::vector<double> bands_;
};

/// a + b and a - b.  Exact: result bandwidths are the elementwise max, no
/// pruning happens here.
BandedMatrix band_add(const BandedMatrix& a, const BandedMatrix& b);
BandedMatrix band_sub(const BandedMatrix& a, const BandedMatrix& b);

/// a * b with entries below `drop` discarded afterwards.  Result bandwidths
/// before pruning are the sums of the operand bandwidths, capped at n - 1.
/// Each discarded entry is at most drop in magnitude, so the elementwise
/// deviation from the exact product is bounded by drop.
BandedMatrix band_mul(const BandedMatrix& a, const BandedMatrix& b,
                      double drop);

/// d * tall for an n x m dense block.  Columns are independent, so the
/// column loop may fan out to worker threads (FSDA_THREADS) without changing
/// a single bit of the result.
Eigen::MatrixXd band_apply(const BandedMatrix& d, const Eigen::MatrixXd& tall);

/// MAC count of band_apply(d, tall) with `cols` columns; used by callers
/// that attribute costs to different buckets.
std::int64_t band_apply_macs(const BandedMatrix& d, int cols);

/// LU factorization with partial pivoting in band storage.  Fill-in is
/// confined to lower_bw extra superdiagonals.  Throws SingularPivotError
/// (with the pivot index) when elimination hits a zero pivot.
class BandedLu {
 public:
  explicit BandedLu(const BandedMatrix& m);
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;
  int n() const { return n_; }

 private:
  int n_ = 0;
  int kl_ = 0;
  int ku_ = 0;
  // LAPACK-style working band: (2*kl_ + ku_ + 1) rows, entry (i, j) of the
  // evolving matrix lives at row kl_ + ku_ + i - j, column j.
  Eigen::MatrixXd work_;
  std::vector<int> ipiv_;
};

/// Solves m * x = rhs by banded LU.
Eigen::MatrixXd band_solve(const BandedMatrix& m, const Eigen::MatrixXd& rhs);

struct BandInvDiag {
  double residual_max = 0.0;      // max |m * result - I| entry
  double clipped_above_drop = 0.0; // largest discarded entry beyond max_bw
  bool clipped = false;            // bandwidth cap removed entries > drop
};

/// Approximate inverse of m as a banded matrix: column blocks of the
/// identity are solved by banded LU, entries with |value| <= drop are
/// discarded, and nothing beyond max_bw off the diagonal is kept.  The
/// inverse of a banded matrix is dense but decays away from the diagonal
/// when m is well conditioned; max_bw caps the cost when the decay is slow.
/// Clipping that loses entries above drop is reported in diag (a quality
/// warning, not an error).
BandedMatrix band_inv_approx(const BandedMatrix& m, double drop, int max_bw,
                             BandInvDiag* diag = nullptr);

/// The eight banded helper products shared by one doubling step, built from
/// the current banded parts da, dg, dh:
///
///   gh    = (I + dg * dh)^-1           hg    = (I + dh * dg)^-1
///   ghg   = gh * dg                    hgh   = hg * dh
///   agh   = da * gh                    aghg  = da * ghg
///   athg  = da^T * hg                  athgh = da^T * hgh
///
/// For symmetric dg, dh the identities hg = gh^T and hgh = hg * dh = dh * gh
/// hold; debug builds assert the latter to 1e-12 relative.
struct HelperSet {
  BandedMatrix gh, hg, ghg, hgh, agh, aghg, athg, athgh;
};

HelperSet make_gh_helpers(const BandedMatrix& da, const BandedMatrix& dg,
                          const BandedMatrix& dh, double drop, int max_bw,
                          BandInvDiag* diag = nullptr);

}  // namespace fsda
