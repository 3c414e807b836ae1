// SPDX-License-Identifier: MIT
#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "fsda/banded.hpp"

namespace fsda {

/// Role a column block plays inside a low-rank factor.  The iteration moves
/// blocks between roles (a G3 tail joins the G1 head of the next iterate, a
/// compressed G2 is shared with the leading block of the A1 factor, and so
/// on); deflation decisions are made by looking these roles up rather than
/// by index arithmetic.
enum class SegRole {
  kG1,      // settled head blocks of the G factor
  kG2,      // growing middle block of the G factor (compression target)
  kG3,      // trailing block of the G factor; next iteration's head
  kA1Tail,  // trailing chain block of the A1 factor
  kH1,      // mirrors of the above for the H side
  kH2,
  kH3,
  kA2Tail,
  kR,       // residual factor block
};

const char* to_string(SegRole role);

/// One column block of a tall factor: its width, role, and the iteration
/// that created it.
struct Segment {
  int width = 0;
  SegRole role = SegRole::kR;
  int birth_k = 0;
};

/// Which factor a ledger belongs to; used to validate role ordering.
enum class FactorKind { kLg, kLa1, kLh, kLa2, kLr };

/// N x m block of low-rank factor columns together with the segment ledger
/// describing its column blocks.  The ledger widths always sum to cols().
class TallFactor {
 public:
  TallFactor() = default;
  /// Factor with no columns yet.
  explicit TallFactor(int n) : n_(n), data_(n, 0) {}
  /// Single-segment factor; seg.width must equal data.cols().
  TallFactor(Eigen::MatrixXd data, Segment seg);
  TallFactor(Eigen::MatrixXd data, std::vector<Segment> segments);

  /// Concatenates factors left to right (ledgers concatenate too).
  static TallFactor hstack(const std::vector<const TallFactor*>& parts);

  int n() const { return n_; }
  int cols() const { return static_cast<int>(data_.cols()); }
  const Eigen::MatrixXd& data() const { return data_; }
  const std::vector<Segment>& segments() const { return segments_; }

  /// Column offset of segment `index` inside data().
  int offset(int index) const;
  /// First segment with the given role, or -1.
  int find_role(SegRole role) const;
  /// Total width of all segments with the given role.
  int role_width(SegRole role) const;
  Eigen::Ref<const Eigen::MatrixXd> view(int index) const;

  void append(const Eigen::MatrixXd& block, Segment seg);
  void erase_segment(int index);
  /// Replaces a segment's columns with `block` (width may change).
  void replace_segment(int index, const Eigen::MatrixXd& block);
  void relabel(int index, SegRole role, int birth_k);
  /// Zeroes entries with |value| <= drop inside segment `index`.
  void prune_segment(int index, double drop);

  double frobenius_norm() const;
  /// Consistency check: ledger widths sum to cols(), all widths positive.
  void check() const;

 private:
  int n_ = 0;
  Eigen::MatrixXd data_;
  std::vector<Segment> segments_;
};

/// Asserts that the factor's roles appear in the canonical order for its
/// kind (e.g. an L^G ledger reads G1... G2 G3).  Throws FsdaError otherwise.
void check_canonical(const TallFactor& f, FactorKind kind);

/// Small dense kernel with row/column block partitions.  The partitions
/// mirror the paired factors' ledgers and exist for I/O and validation; all
/// arithmetic happens on data() directly.
class BlockKernel {
 public:
  BlockKernel() = default;
  BlockKernel(Eigen::MatrixXd data, std::vector<int> row_blocks,
              std::vector<int> col_blocks);
  /// Square kernel whose partitions mirror one ledger.
  static BlockKernel square(Eigen::MatrixXd data,
                            const std::vector<int>& blocks);

  int rows() const { return static_cast<int>(data_.rows()); }
  int cols() const { return static_cast<int>(data_.cols()); }
  const Eigen::MatrixXd& data() const { return data_; }
  Eigen::MatrixXd& data() { return data_; }
  const std::vector<int>& row_blocks() const { return row_blocks_; }
  const std::vector<int>& col_blocks() const { return col_blocks_; }
  void set_blocks(std::vector<int> row_blocks, std::vector<int> col_blocks);
  void check() const;

 private:
  Eigen::MatrixXd data_;
  std::vector<int> row_blocks_;
  std::vector<int> col_blocks_;
};

/// A column range move: `width` columns starting at src_begin are coalesced
/// into the equal columns starting at dst_begin.
struct ColMove {
  int src_begin = 0;
  int width = 0;
  int dst_begin = 0;
};

/// Sums the rows (columns) of `m` at each move's source range into the
/// destination range, then deletes the source rows (columns).  Sources must
/// be pairwise disjoint and must not intersect any destination.  This is the
/// kernel half of deflation: when two factor column blocks are equal,
/// adding the kernel weight of one onto the other and deleting it leaves
/// L1 * K * L2^T unchanged.
Eigen::MatrixXd merge_rows_sum(const Eigen::MatrixXd& m,
                               const std::vector<ColMove>& moves);
Eigen::MatrixXd merge_cols_sum(const Eigen::MatrixXd& m,
                               const std::vector<ColMove>& moves);

/// Factor-level deflation for a factor/kernel pair whose kernel rows and
/// columns both follow `f`'s columns.  Verifies that each source column is
/// elementwise equal to its destination column within 1e-13 * column norm
/// (MergeMismatchError otherwise), applies merge_rows_sum and merge_cols_sum
/// to the kernel, and drops the source columns from the factor.  Source
/// ranges must cover whole ledger segments.
std::pair<TallFactor, BlockKernel> merge_columns(
    const TallFactor& f, const BlockKernel& k,
    const std::vector<ColMove>& moves);

/// Equality check used by merge_columns, exposed for callers that need to
/// probe whether a merge would be exact (returns the max deviation scaled
/// by column norm, or 0 for empty moves).
double column_merge_deviation(const Eigen::MatrixXd& data,
                              const std::vector<ColMove>& moves);

/// Deletes the source columns of `moves` from the factor (whole segments
/// only).  The one-sided counterpart of merge_columns for factor pairs
/// whose kernel is not square.
TallFactor drop_columns(const TallFactor& f, const std::vector<ColMove>& moves);

/// dense(d) + l1 * k * l2^T.  Desk-scale only (materializes N x N).
Eigen::MatrixXd reconstruct(const BandedMatrix& d, const TallFactor& l1,
                            const Eigen::MatrixXd& k, const TallFactor& l2);

/// Symmetric variant: dense(d) + l * k * l^T.
Eigen::MatrixXd reconstruct(const BandedMatrix& d, const TallFactor& l,
                            const Eigen::MatrixXd& k);

/// Binary factor container: magic "TALF", then n, cols, segment count as
/// little-endian int64, then width/role/birth_k per segment, then the data
/// column-major as float64.
void write_talf(const TallFactor& f, const std::string& path);
TallFactor read_talf(const std::string& path);

/// Binary kernel container: magic "KERN", then rows, cols, row block count,
/// col block count, the block widths, then data column-major as float64.
void write_kern(const BlockKernel& k, const std::string& path);
BlockKernel read_kern(const std::string& path);

}  // namespace fsda
