// SPDX-License-Identifier: MIT
#pragma once

#include <stdexcept>
#include <string>

namespace fsda {

/// Base class for all failures raised by the library.  Everything that can go
/// wrong carries enough context to act on it (pivot index, column index, file
/// position) instead of a bare message.
class FsdaError : public std::runtime_error {
 public:
  explicit FsdaError(const std::string& what) : std::runtime_error(what) {}
};

/// Banded LU hit a numerically zero pivot.  The matrix is singular (or close
/// enough that elimination cannot continue); no regularization is attempted.
class SingularPivotError : public FsdaError {
 public:
  SingularPivotError(int pivot_index, double pivot_value)
      : FsdaError("banded LU breakdown: zero pivot at index " +
                  std::to_string(pivot_index) + " (value " +
                  std::to_string(pivot_value) + ")"),
        pivot_index(pivot_index),
        pivot_value(pivot_value) {}
  int pivot_index;
  double pivot_value;
};

/// merge_columns was asked to coalesce two column blocks that are not
/// elementwise equal.  This means the caller's bookkeeping about duplicated
/// segments has drifted, which would silently corrupt the low-rank terms.
class MergeMismatchError : public FsdaError {
 public:
  MergeMismatchError(int column, double deviation)
      : FsdaError("merge_columns: source column " + std::to_string(column) +
                  " deviates from its destination by " +
                  std::to_string(deviation)),
        column(column),
        deviation(deviation) {}
  int column;
  double deviation;
};

/// A file (matrix, factor, kernel, bundle, config) could not be parsed.
class ParseError : public FsdaError {
 public:
  ParseError(const std::string& path, const std::string& detail)
      : FsdaError("cannot read '" + path + "': " + detail), path(path) {}
  std::string path;
};

/// The doubling iteration cannot continue (singular kernel system, singular
/// banded system, non-finite values).  Carries the iteration index.
class BreakdownError : public FsdaError {
 public:
  BreakdownError(int k, const std::string& detail)
      : FsdaError("iteration " + std::to_string(k) + " breakdown: " + detail),
        k(k) {}
  int k;
};

}  // namespace fsda
