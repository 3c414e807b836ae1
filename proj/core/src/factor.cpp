// SPDX-License-Identifier: MIT
#include "fsda/factor.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

#include "fsda/errors.hpp"
#include "io_util.hpp"

namespace fsda {

const char* to_string(SegRole role) {
  switch (role) {
    case SegRole::kG1: return "G1";
    case SegRole::kG2: return "G2";
    case SegRole::kG3: return "G3";
    case SegRole::kA1Tail: return "A1tail";
    case SegRole::kH1: return "H1";
    case SegRole::kH2: return "H2";
    case SegRole::kH3: return "H3";
    case SegRole::kA2Tail: return "A2tail";
    case SegRole::kR: return "R";
  }
  return "?";
}

TallFactor::TallFactor(Eigen::MatrixXd data, Segment seg)
    : n_(static_cast<int>(data.rows())), data_(std::move(data)) {
  assert(seg.width == data_.cols());
  if (seg.width > 0) segments_.push_back(seg);
  check();
}

TallFactor::TallFactor(Eigen::MatrixXd data, std::vector<Segment> segments)
    : n_(static_cast<int>(data.rows())),
      data_(std::move(data)),
      segments_(std::move(segments)) {
  check();
}

TallFactor TallFactor::hstack(const std::vector<const TallFactor*>& parts) {
  assert(!parts.empty());
  const int n = parts.front()->n();
  int total = 0;
  for (const TallFactor* p : parts) {
    assert(p->n() == n);
    total += p->cols();
  }
  Eigen::MatrixXd data(n, total);
  std::vector<Segment> segs;
  int at = 0;
  for (const TallFactor* p : parts) {
    if (p->cols() > 0) data.middleCols(at, p->cols()) = p->data();
    at += p->cols();
    segs.insert(segs.end(), p->segments().begin(), p->segments().end());
  }
  return TallFactor(std::move(data), std::move(segs));
}

int TallFactor::offset(int index) const {
  assert(index >= 0 && index <= static_cast<int>(segments_.size()));
  int at = 0;
  for (int s = 0; s < index; ++s) at += segments_[s].width;
  return at;
}

int TallFactor::find_role(SegRole role) const {
  for (int s = 0; s < static_cast<int>(segments_.size()); ++s) {
    if (segments_[s].role == role) return s;
  }
  return -1;
}

int TallFactor::role_width(SegRole role) const {
  int w = 0;
  for (const Segment& s : segments_) {
    if (s.role == role) w += s.width;
  }
  return w;
}

Eigen::Ref<const Eigen::MatrixXd> TallFactor::view(int index) const {
  assert(index >= 0 && index < static_cast<int>(segments_.size()));
  return data_.middleCols(offset(index), segments_[index].width);
}

void TallFactor::append(const Eigen::MatrixXd& block, Segment seg) {
  assert(block.rows() == n_);
  assert(seg.width == block.cols());
  if (seg.width == 0) return;
  data_.conservativeResize(Eigen::NoChange, data_.cols() + seg.width);
  data_.rightCols(seg.width) = block;
  segments_.push_back(seg);
}

void TallFactor::erase_segment(int index) {
  assert(index >= 0 && index < static_cast<int>(segments_.size()));
  const int at = offset(index);
  const int w = segments_[index].width;
  const int tail = cols() - at - w;
  Eigen::MatrixXd next(n_, cols() - w);
  if (at > 0) next.leftCols(at) = data_.leftCols(at);
  if (tail > 0) next.rightCols(tail) = data_.rightCols(tail);
  data_ = std::move(next);
  segments_.erase(segments_.begin() + index);
}

void TallFactor::replace_segment(int index, const Eigen::MatrixXd& block) {
  assert(index >= 0 && index < static_cast<int>(segments_.size()));
  assert(block.rows() == n_);
  const int at = offset(index);
  const int w = segments_[index].width;
  const int tail = cols() - at - w;
  const int nw = static_cast<int>(block.cols());
  Eigen::MatrixXd next(n_, cols() - w + nw);
  if (at > 0) next.leftCols(at) = data_.leftCols(at);
  if (nw > 0) next.middleCols(at, nw) = block;
  if (tail > 0) next.rightCols(tail) = data_.rightCols(tail);
  data_ = std::move(next);
  segments_[index].width = nw;
  if (nw == 0) segments_.erase(segments_.begin() + index);
}

void TallFactor::relabel(int index, SegRole role, int birth_k) {
  assert(index >= 0 && index < static_cast<int>(segments_.size()));
  segments_[index].role = role;
  segments_[index].birth_k = birth_k;
}

void TallFactor::prune_segment(int index, double drop) {
  assert(index >= 0 && index < static_cast<int>(segments_.size()));
  auto block = data_.middleCols(offset(index), segments_[index].width);
  block = (block.array().abs() > drop).select(block, 0.0);
}

double TallFactor::frobenius_norm() const { return data_.norm(); }

void TallFactor::check() const {
  int total = 0;
  for (const Segment& s : segments_) {
    if (s.width <= 0) throw FsdaError("factor ledger has a non-positive width");
    total += s.width;
  }
  if (total != cols()) {
    throw FsdaError("factor ledger widths sum to " + std::to_string(total) +
                    " but the factor has " + std::to_string(cols()) +
                    " columns");
  }
}

void check_canonical(const TallFactor& f, FactorKind kind) {
  // Each factor kind allows a fixed role sequence: any number of head
  // blocks, then at most one middle block, then at most one tail block.
  struct Order {
    SegRole head, mid, tail;
    bool has_head;
  };
  Order order{};
  switch (kind) {
    case FactorKind::kLg:
      order = {SegRole::kG1, SegRole::kG2, SegRole::kG3, true};
      break;
    case FactorKind::kLh:
      order = {SegRole::kH1, SegRole::kH2, SegRole::kH3, true};
      break;
    case FactorKind::kLa1:
      order = {SegRole::kG2, SegRole::kG2, SegRole::kA1Tail, false};
      break;
    case FactorKind::kLa2:
      order = {SegRole::kH2, SegRole::kH2, SegRole::kA2Tail, false};
      break;
    case FactorKind::kLr: {
      for (const Segment& s : f.segments()) {
        if (s.role != SegRole::kR) {
          throw FsdaError("residual factor ledger has a non-R segment");
        }
      }
      return;
    }
  }
  int stage = order.has_head ? 0 : 1;  // 0 = heads, 1 = mid, 2 = tail, 3 = end
  for (const Segment& s : f.segments()) {
    if (stage == 0 && s.role == order.head) continue;
    if (stage <= 1 && s.role == order.mid) {
      stage = 2;
      continue;
    }
    if (stage <= 2 && s.role == order.tail) {
      stage = 3;
      continue;
    }
    throw FsdaError(std::string("factor ledger role ") + to_string(s.role) +
                    " out of canonical order");
  }
}

BlockKernel::BlockKernel(Eigen::MatrixXd data, std::vector<int> row_blocks,
                         std::vector<int> col_blocks)
    : data_(std::move(data)),
      row_blocks_(std::move(row_blocks)),
      col_blocks_(std::move(col_blocks)) {
  check();
}

BlockKernel BlockKernel::square(Eigen::MatrixXd data,
                                const std::vector<int>& blocks) {
  return BlockKernel(std::move(data), blocks, blocks);
}

void BlockKernel::set_blocks(std::vector<int> row_blocks,
                             std::vector<int> col_blocks) {
  row_blocks_ = std::move(row_blocks);
  col_blocks_ = std::move(col_blocks);
  check();
}

void BlockKernel::check() const {
  int r = 0, c = 0;
  for (int w : row_blocks_) r += w;
  for (int w : col_blocks_) c += w;
  if (r != rows() || c != cols()) {
    throw FsdaError("kernel block partition does not match its dimensions");
  }
}

namespace {

void check_disjoint(const std::vector<ColMove>& moves, int extent) {
  for (const ColMove& m : moves) {
    if (m.width < 0 || m.src_begin < 0 || m.dst_begin < 0 ||
        m.src_begin + m.width > extent || m.dst_begin + m.width > extent) {
      throw FsdaError("merge move out of range");
    }
  }
  for (std::size_t a = 0; a < moves.size(); ++a) {
    for (std::size_t b = 0; b < moves.size(); ++b) {
      if (a == b) continue;
      const bool src_src = moves[a].src_begin < moves[b].src_begin + moves[b].width &&
                           moves[b].src_begin < moves[a].src_begin + moves[a].width;
      if (src_src && a < b) throw FsdaError("merge sources overlap");
      const bool src_dst = moves[a].src_begin < moves[b].dst_begin + moves[b].width &&
                           moves[b].dst_begin < moves[a].src_begin + moves[a].width;
      if (src_dst) throw FsdaError("merge source overlaps a destination");
    }
    const bool self = moves[a].src_begin < moves[a].dst_begin + moves[a].width &&
                      moves[a].dst_begin < moves[a].src_begin + moves[a].width;
    if (self && moves[a].width > 0) {
      throw FsdaError("merge source overlaps its own destination");
    }
  }
}

Eigen::MatrixXd drop_ranges_rows(const Eigen::MatrixXd& m,
                                 const std::vector<ColMove>& moves) {
  std::vector<bool> dead(m.rows(), false);
  for (const ColMove& mv : moves) {
    for (int r = mv.src_begin; r < mv.src_begin + mv.width; ++r) dead[r] = true;
  }
  int kept = 0;
  for (bool d : dead) kept += d ? 0 : 1;
  Eigen::MatrixXd out(kept, m.cols());
  int at = 0;
  for (int r = 0; r < m.rows(); ++r) {
    if (!dead[r]) out.row(at++) = m.row(r);
  }
  return out;
}

}  // namespace

Eigen::MatrixXd merge_rows_sum(const Eigen::MatrixXd& m,
                               const std::vector<ColMove>& moves) {
  check_disjoint(moves, static_cast<int>(m.rows()));
  Eigen::MatrixXd work = m;
  for (const ColMove& mv : moves) {
    if (mv.width == 0) continue;
    work.middleRows(mv.dst_begin, mv.width) +=
        work.middleRows(mv.src_begin, mv.width);
  }
  return drop_ranges_rows(work, moves);
}

Eigen::MatrixXd merge_cols_sum(const Eigen::MatrixXd& m,
                               const std::vector<ColMove>& moves) {
  return merge_rows_sum(m.transpose(), moves).transpose();
}

double column_merge_deviation(const Eigen::MatrixXd& data,
                              const std::vector<ColMove>& moves) {
  double worst = 0.0;
  for (const ColMove& mv : moves) {
    for (int c = 0; c < mv.width; ++c) {
      const auto src = data.col(mv.src_begin + c);
      const auto dst = data.col(mv.dst_begin + c);
      const double dev = (src - dst).lpNorm<Eigen::Infinity>();
      const double scale = std::max(src.norm(), dst.norm());
      if (dev == 0.0) continue;
      if (scale == 0.0) return std::numeric_limits<double>::infinity();
      worst = std::max(worst, dev / scale);
    }
  }
  return worst;
}

std::pair<TallFactor, BlockKernel> merge_columns(
    const TallFactor& f, const BlockKernel& k,
    const std::vector<ColMove>& moves) {
  assert(k.rows() == f.cols() && k.cols() == f.cols());
  check_disjoint(moves, f.cols());
  // Duplicate check, column by column, so the error can name the offender.
  for (const ColMove& mv : moves) {
    for (int c = 0; c < mv.width; ++c) {
      const auto src = f.data().col(mv.src_begin + c);
      const auto dst = f.data().col(mv.dst_begin + c);
      const double dev = (src - dst).lpNorm<Eigen::Infinity>();
      const double tol = 1e-13 * std::max(src.norm(), dst.norm());
      if (dev > tol) {
        throw MergeMismatchError(mv.src_begin + c, dev);
      }
    }
  }
  Eigen::MatrixXd merged = merge_cols_sum(merge_rows_sum(k.data(), moves), moves);

  // Sources must cover whole ledger segments; rebuild the ledger without
  // them and the factor without the dropped columns.
  std::vector<bool> dead_col(f.cols(), false);
  for (const ColMove& mv : moves) {
    for (int c = mv.src_begin; c < mv.src_begin + mv.width; ++c) {
      dead_col[c] = true;
    }
  }
  std::vector<Segment> new_segs;
  int at = 0;
  for (const Segment& s : f.segments()) {
    bool all_dead = true, all_live = true;
    for (int c = at; c < at + s.width; ++c) {
      (dead_col[c] ? all_live : all_dead) = false;
    }
    if (!all_dead && !all_live) {
      throw FsdaError("merge source splits ledger segment at column " +
                      std::to_string(at));
    }
    if (all_live) new_segs.push_back(s);
    at += s.width;
  }
  int kept = 0;
  for (bool d : dead_col) kept += d ? 0 : 1;
  Eigen::MatrixXd new_data(f.n(), kept);
  at = 0;
  for (int c = 0; c < f.cols(); ++c) {
    if (!dead_col[c]) new_data.col(at++) = f.data().col(c);
  }
  TallFactor nf(std::move(new_data), std::move(new_segs));
  std::vector<int> widths;
  for (const Segment& s : nf.segments()) widths.push_back(s.width);
  return {std::move(nf), BlockKernel::square(std::move(merged), widths)};
}

TallFactor drop_columns(const TallFactor& f, const std::vector<ColMove>& moves) {
  check_disjoint(moves, f.cols());
  std::vector<bool> dead_col(f.cols(), false);
  for (const ColMove& mv : moves) {
    for (int c = mv.src_begin; c < mv.src_begin + mv.width; ++c) {
      dead_col[c] = true;
    }
  }
  std::vector<Segment> new_segs;
  int at = 0;
  for (const Segment& s : f.segments()) {
    bool all_dead = true, all_live = true;
    for (int c = at; c < at + s.width; ++c) {
      (dead_col[c] ? all_live : all_dead) = false;
    }
    if (!all_dead && !all_live) {
      throw FsdaError("drop source splits ledger segment at column " +
                      std::to_string(at));
    }
    if (all_live) new_segs.push_back(s);
    at += s.width;
  }
  int kept = 0;
  for (bool d : dead_col) kept += d ? 0 : 1;
  Eigen::MatrixXd new_data(f.n(), kept);
  at = 0;
  for (int c = 0; c < f.cols(); ++c) {
    if (!dead_col[c]) new_data.col(at++) = f.data().col(c);
  }
  return TallFactor(std::move(new_data), std::move(new_segs));
}

Eigen::MatrixXd reconstruct(const BandedMatrix& d, const TallFactor& l1,
                            const Eigen::MatrixXd& k, const TallFactor& l2) {
  assert(l1.n() == d.n() && l2.n() == d.n());
  assert(k.rows() == l1.cols() && k.cols() == l2.cols());
  Eigen::MatrixXd out = d.dense();
  if (l1.cols() > 0 && l2.cols() > 0) {
    out.noalias() += l1.data() * k * l2.data().transpose();
  }
  return out;
}

Eigen::MatrixXd reconstruct(const BandedMatrix& d, const TallFactor& l,
                            const Eigen::MatrixXd& k) {
  return reconstruct(d, l, k, l);
}

void write_talf(const TallFactor& f, const std::string& path) {
  detail::BinWriter w(path);
  w.magic("TALF");
  w.i64(f.n());
  w.i64(f.cols());
  w.i64(static_cast<std::int64_t>(f.segments().size()));
  for (const Segment& s : f.segments()) {
    w.i64(s.width);
    w.i64(static_cast<std::int64_t>(s.role));
    w.i64(s.birth_k);
  }
  w.f64(f.data().data(), static_cast<std::size_t>(f.n()) * f.cols());
  w.close();
}

TallFactor read_talf(const std::string& path) {
  detail::BinReader r(path);
  r.magic("TALF");
  const std::int64_t n = r.i64_nonneg("n");
  const std::int64_t cols = r.i64_nonneg("cols");
  const std::int64_t nseg = r.i64_nonneg("segment count");
  if (n > (std::int64_t{1} << 31) || cols > (std::int64_t{1} << 31) ||
      nseg > cols) {
    throw ParseError(path, "implausible dimensions");
  }
  std::vector<Segment> segs;
  for (std::int64_t s = 0; s < nseg; ++s) {
    Segment seg;
    seg.width = static_cast<int>(r.i64_nonneg("segment width"));
    const std::int64_t role = r.i64("segment role");
    if (role < 0 || role > static_cast<std::int64_t>(SegRole::kR)) {
      throw ParseError(path, "unknown segment role");
    }
    seg.role = static_cast<SegRole>(role);
    seg.birth_k = static_cast<int>(r.i64("segment birth"));
    segs.push_back(seg);
  }
  Eigen::MatrixXd data(n, cols);
  r.f64(data.data(), static_cast<std::size_t>(n * cols), "factor data");
  r.expect_eof();
  try {
    return TallFactor(std::move(data), std::move(segs));
  } catch (const FsdaError& e) {
    throw ParseError(path, e.what());
  }
}

void write_kern(const BlockKernel& k, const std::string& path) {
  detail::BinWriter w(path);
  w.magic("KERN");
  w.i64(k.rows());
  w.i64(k.cols());
  w.i64(static_cast<std::int64_t>(k.row_blocks().size()));
  w.i64(static_cast<std::int64_t>(k.col_blocks().size()));
  for (int b : k.row_blocks()) w.i64(b);
  for (int b : k.col_blocks()) w.i64(b);
  w.f64(k.data().data(), static_cast<std::size_t>(k.rows()) * k.cols());
  w.close();
}

BlockKernel read_kern(const std::string& path) {
  detail::BinReader r(path);
  r.magic("KERN");
  const std::int64_t rows = r.i64_nonneg("rows");
  const std::int64_t cols = r.i64_nonneg("cols");
  const std::int64_t nrb = r.i64_nonneg("row block count");
  const std::int64_t ncb = r.i64_nonneg("col block count");
  if (rows > (std::int64_t{1} << 31) || cols > (std::int64_t{1} << 31) ||
      nrb > rows || ncb > cols) {
    throw ParseError(path, "implausible dimensions");
  }
  std::vector<int> rb, cb;
  for (std::int64_t b = 0; b < nrb; ++b) {
    rb.push_back(static_cast<int>(r.i64_nonneg("row block width")));
  }
  for (std::int64_t b = 0; b < ncb; ++b) {
    cb.push_back(static_cast<int>(r.i64_nonneg("col block width")));
  }
  Eigen::MatrixXd data(rows, cols);
  r.f64(data.data(), static_cast<std::size_t>(rows * cols), "kernel data");
  r.expect_eof();
  try {
    return BlockKernel(std::move(data), std::move(rb), std::move(cb));
  } catch (const FsdaError& e) {
    throw ParseError(path, e.what());
  }
}

}  // namespace fsda
