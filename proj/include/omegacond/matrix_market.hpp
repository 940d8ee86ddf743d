#pragma once

#include <iosfwd>
#include <string>

#include "omegacond/dense.hpp"

namespace omegacond {

// Matrix Market I/O for dense matrices. The writer emits array format with
// 17 significant digits so that write -> read reproduces every double exactly.
// The reader accepts array and coordinate files, general or symmetric.

DenseMatrix read_matrix_market(std::istream& in);
DenseMatrix read_matrix_market_file(const std::string& path);

void write_matrix_market(std::ostream& out, const DenseMatrix& a);
void write_matrix_market_file(const std::string& path, const DenseMatrix& a);

/// Coordinate-format writer (1-based indices, zeros skipped).
void write_matrix_market_coordinate(std::ostream& out, const DenseMatrix& a);

} // namespace omegacond
