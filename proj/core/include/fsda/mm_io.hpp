// SPDX-License-Identifier: MIT
#pragma once

#include <string>

#include "fsda/banded.hpp"

namespace fsda {

/// Writes `m` in Matrix Market coordinate format (1-based indices, full
/// %.17g precision so values round-trip bitwise).  With symmetric = true
/// only the lower triangle is emitted under the "symmetric" qualifier; the
/// caller asserts that m really is symmetric.
void write_matrix_market(const BandedMatrix& m, const std::string& path,
                         bool symmetric = false);

/// Reads a Matrix Market coordinate file ("real", "integer", or "pattern"
/// is rejected; "general" and "symmetric" qualifiers are accepted).
/// Bandwidths are the tightest that hold the nonzeros.  Throws ParseError
/// with the offending detail on malformed input.
BandedMatrix read_matrix_market(const std::string& path);

/// Binary band container: magic "BNDM", then n, lower_bw, upper_bw as
/// little-endian int64, then the (lower+upper+1) x n diagonal array
/// row-major as float64 (row 0 is the outermost superdiagonal).
void write_bndm(const BandedMatrix& m, const std::string& path);
BandedMatrix read_bndm(const std::string& path);

}  // namespace fsda
