// SPDX-License-Identifier: MIT
#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "fsda/errors.hpp"

namespace fsda::detail {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& text, const std::string& where) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ParseError(where, "bad number '" + text + "'");
  }
}

inline std::int64_t parse_int(const std::string& text,
                              const std::string& where) {
  try {
    std::size_t pos = 0;
    const std::int64_t v = std::stoll(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ParseError(where, "bad integer '" + text + "'");
  }
}

/// key=value lines; '#' starts a comment, blank lines are fine.
inline std::vector<std::pair<std::string, std::string>> read_kv(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, "cannot open");
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto strip = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    line = strip(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(
          path, "line " + std::to_string(lineno) + ": expected key=value");
    }
    out.emplace_back(strip(line.substr(0, eq)), strip(line.substr(eq + 1)));
  }
  return out;
}

}  // namespace fsda::detail
