#pragma once

#include <span>
#include <vector>

#include "omegacond/dense.hpp"

namespace omegacond {

// Data-parallel kernels. Each function exists twice: the production version
// here (OpenMP above a size threshold) and a plain-loop reference in
// omegacond::serial used by the tests and the kernel benchmark.
//
// Parallel loops are always over output elements with the inner reduction kept
// serial, so both versions produce bit-identical results for any thread count.

namespace kernels {

/// C = A * B
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);

/// G = A^T * A (symmetric n x n Gram matrix of an m x n input)
DenseMatrix gram(const DenseMatrix& a);

/// y = A * x
void matvec(const DenseMatrix& a, std::span<const double> x, std::span<double> y);

/// y = A^T * x
void matvec_transpose(const DenseMatrix& a, std::span<const double> x, std::span<double> y);

/// In-place lower Cholesky of a symmetric matrix stored row-major.
/// Returns the index of the first non-positive pivot, or -1 on success; the
/// failing pivot value is stored in *bad_pivot when provided.
int cholesky_inplace(std::vector<double>& a, int n, double* bad_pivot);

/// In-place LU with partial row pivoting (L unit lower, U upper, both packed
/// into a). perm[i] gives the source row of row i of the factored matrix.
/// Returns the index of a vanishing pivot (|pivot| <= threshold), or -1.
int lu_inplace(std::vector<double>& a, int n, std::vector<int>& perm, double pivot_threshold);

/// Solve L * X = B for several right-hand sides; L lower-triangular n x n,
/// B n x k. Parallel across right-hand-side columns.
DenseMatrix forward_solve_multi(const DenseMatrix& lower, const DenseMatrix& rhs);

} // namespace kernels

namespace serial {

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix gram(const DenseMatrix& a);
void matvec(const DenseMatrix& a, std::span<const double> x, std::span<double> y);
void matvec_transpose(const DenseMatrix& a, std::span<const double> x, std::span<double> y);
int cholesky_inplace(std::vector<double>& a, int n, double* bad_pivot);
int lu_inplace(std::vector<double>& a, int n, std::vector<int>& perm, double pivot_threshold);
DenseMatrix forward_solve_multi(const DenseMatrix& lower, const DenseMatrix& rhs);

} // namespace serial

} // namespace omegacond
