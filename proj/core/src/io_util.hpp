// SPDX-License-Identifier: MIT
#pragma once

// Private helpers for the little-endian binary container formats (BNDM,
// TALF, KERN).  Not installed.

#include <bit>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "fsda/errors.hpp"

namespace fsda::detail {

static_assert(std::endian::native == std::endian::little,
              "binary container formats are little-endian");

class BinWriter {
 public:
  explicit BinWriter(const std::string& path) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw ParseError(path, "cannot open for writing");
  }
  void magic(const char tag[4]) { raw(tag, 4); }
  void i64(std::int64_t v) { raw(&v, sizeof v); }
  void f64(const double* v, std::size_t count) { raw(v, count * sizeof(double)); }
  void close() {
    out_.close();
    if (!out_) throw ParseError(path_, "write failed");
  }

 private:
  void raw(const void* p, std::size_t bytes) {
    out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(bytes));
  }
  std::string path_;
  std::ofstream out_;
};

class BinReader {
 public:
  explicit BinReader(const std::string& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw ParseError(path, "cannot open");
  }
  void magic(const char tag[4]) {
    char got[4] = {};
    raw(got, 4, "magic");
    if (std::string(got, 4) != std::string(tag, 4)) {
      throw ParseError(path_, "bad magic, expected " + std::string(tag, 4));
    }
  }
  std::int64_t i64(const char* what) {
    std::int64_t v = 0;
    raw(&v, sizeof v, what);
    return v;
  }
  std::int64_t i64_nonneg(const char* what) {
    const std::int64_t v = i64(what);
    if (v < 0) throw ParseError(path_, std::string("negative ") + what);
    return v;
  }
  void f64(double* v, std::size_t count, const char* what) {
    raw(v, count * sizeof(double), what);
  }
  void expect_eof() {
    char extra = 0;
    in_.read(&extra, 1);
    if (!in_.eof()) throw ParseError(path_, "trailing bytes");
  }
  const std::string& path() const { return path_; }

 private:
  void raw(void* p, std::size_t bytes, const char* what) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(bytes));
    if (static_cast<std::size_t>(in_.gcount()) != bytes) {
      throw ParseError(path_, std::string("truncated while reading ") + what);
    }
  }
  std::string path_;
  std::ifstream in_;
};

}  // namespace fsda::detail
