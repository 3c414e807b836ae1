// SPDX-License-Identifier: MIT
#include "fsda/mm_io.hpp"

#include <algorithm>
#include <cassert>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "fsda/errors.hpp"
#include "io_util.hpp"

namespace fsda {

namespace {

struct Entry {
  int i, j;
  double v;
};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

void write_matrix_market(const BandedMatrix& m, const std::string& path,
                         bool symmetric) {
  std::ofstream out(path);
  if (!out) throw ParseError(path, "cannot open for writing");
  out << "%%MatrixMarket matrix coordinate real "
      << (symmetric ? "symmetric" : "general") << "\n";
  std::vector<Entry> entries;
  for (int o = -m.lower_bw(); o <= m.upper_bw(); ++o) {
    auto d = m.diagonal(o);
    const int jlo = std::max(0, o);
    const int jhi = m.n() - 1 + std::min(0, o);
    for (int j = jlo; j <= jhi; ++j) {
      const int i = j - o;
      if (d[j] == 0.0) continue;
      if (symmetric && j > i) continue;  // keep the lower triangle only
      entries.push_back({i, j, d[j]});
    }
  }
  out << m.n() << " " << m.n() << " " << entries.size() << "\n";
  char buf[64];
  for (const Entry& e : entries) {
    std::snprintf(buf, sizeof buf, "%d %d %.17g\n", e.i + 1, e.j + 1, e.v);
    out << buf;
  }
  out.close();
  if (!out) throw ParseError(path, "write failed");
}

BandedMatrix read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, "cannot open");
  std::string banner;
  if (!std::getline(in, banner)) throw ParseError(path, "empty file");
  std::istringstream hs(banner);
  std::string tag, object, format, field, qualifier;
  hs >> tag >> object >> format >> field >> qualifier;
  if (lower(tag) != "%%matrixmarket" || lower(object) != "matrix") {
    throw ParseError(path, "not a Matrix Market file");
  }
  if (lower(format) != "coordinate") {
    throw ParseError(path, "only coordinate format is supported");
  }
  const std::string f = lower(field);
  if (f != "real" && f != "integer") {
    throw ParseError(path, "unsupported field type '" + field + "'");
  }
  const std::string q = lower(qualifier);
  const bool symmetric = q == "symmetric";
  if (!symmetric && q != "general") {
    throw ParseError(path, "unsupported qualifier '" + qualifier + "'");
  }

  std::string line;
  long rows = -1, cols = -1, nnz = -1;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '%') continue;
    std::istringstream ls(line);
    if (!(ls >> rows >> cols >> nnz)) {
      throw ParseError(path, "bad size line " + std::to_string(lineno));
    }
    break;
  }
  if (rows < 0) throw ParseError(path, "missing size line");
  if (rows != cols) throw ParseError(path, "matrix is not square");
  if (nnz < 0) throw ParseError(path, "negative entry count");
  const int n = static_cast<int>(rows);

  std::vector<Entry> entries;
  entries.reserve(static_cast<std::size_t>(nnz));
  long seen = 0;
  while (seen < nnz) {
    if (!std::getline(in, line)) {
      throw ParseError(path, "expected " + std::to_string(nnz) +
                                 " entries, got " + std::to_string(seen));
    }
    ++lineno;
    if (line.empty() || line[0] == '%') continue;
    std::istringstream ls(line);
    long i = 0, j = 0;
    double v = 0.0;
    if (!(ls >> i >> j >> v)) {
      throw ParseError(path, "bad entry at line " + std::to_string(lineno));
    }
    if (i < 1 || i > n || j < 1 || j > n) {
      throw ParseError(path, "index out of range at line " +
                                 std::to_string(lineno));
    }
    entries.push_back({static_cast<int>(i - 1), static_cast<int>(j - 1), v});
    if (symmetric && i != j) {
      entries.push_back({static_cast<int>(j - 1), static_cast<int>(i - 1), v});
    }
    ++seen;
  }

  int lo = 0, up = 0;
  for (const Entry& e : entries) {
    if (e.v == 0.0) continue;
    lo = std::max(lo, e.i - e.j);
    up = std::max(up, e.j - e.i);
  }
  BandedMatrix m(n, lo, up);
  for (const Entry& e : entries) {
    if (e.v == 0.0) continue;
    m.at(e.i, e.j) += e.v;  // duplicates accumulate, as is conventional
  }
  return m;
}

void write_bndm(const BandedMatrix& m, const std::string& path) {
  detail::BinWriter w(path);
  w.magic("BNDM");
  w.i64(m.n());
  w.i64(m.lower_bw());
  w.i64(m.upper_bw());
  // Row 0 is diagonal offset upper_bw (outermost superdiagonal).
  for (int o = m.upper_bw(); o >= -m.lower_bw(); --o) {
    auto d = m.diagonal(o);
    w.f64(d.data(), d.size());
  }
  w.close();
}

BandedMatrix read_bndm(const std::string& path) {
  detail::BinReader r(path);
  r.magic("BNDM");
  const std::int64_t n = r.i64_nonneg("n");
  const std::int64_t lo = r.i64_nonneg("lower_bw");
  const std::int64_t up = r.i64_nonneg("upper_bw");
  if (n > (std::int64_t{1} << 31) || lo >= std::max<std::int64_t>(n, 1) ||
      up >= std::max<std::int64_t>(n, 1)) {
    throw ParseError(path, "implausible dimensions");
  }
  BandedMatrix m(static_cast<int>(n), static_cast<int>(lo),
                 static_cast<int>(up));
  for (int o = m.upper_bw(); o >= -m.lower_bw(); --o) {
    auto d = m.diagonal(o);
    r.f64(d.data(), d.size(), "diagonal data");
  }
  r.expect_eof();
  return m;
}

}  // namespace fsda
