#include "omegacond/dense.hpp"

#include <cmath>
#include <cstdlib>

namespace omegacond {

DenseMatrix::DenseMatrix(int rows, int cols)
    : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, 0.0) {
    if (rows < 1 || cols < 1)
        throw Error(ErrorCode::DimensionMismatch, "matrix dimensions must be >= 1");
}

DenseMatrix::DenseMatrix(int rows, int cols, Vector entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
    check_shape_and_entries();
}

void DenseMatrix::check_shape_and_entries() const {
    if (rows_ < 1 || cols_ < 1)
        throw Error(ErrorCode::DimensionMismatch, "matrix dimensions must be >= 1");
    if (data_.size() != static_cast<std::size_t>(rows_) * cols_)
        throw Error(ErrorCode::DimensionMismatch, "entry count does not match rows*cols");
    if (!all_finite(data_))
        throw Error(ErrorCode::ParseError, "matrix contains NaN or Inf");
}

DenseMatrix DenseMatrix::identity(int n) {
    DenseMatrix eye(n, n);
    for (int i = 0; i < n; ++i) eye(i, i) = 1.0;
    return eye;
}

DenseMatrix DenseMatrix::diagonal(std::span<const double> d) {
    DenseMatrix a(static_cast<int>(d.size()), static_cast<int>(d.size()));
    for (int i = 0; i < a.rows(); ++i) a(i, i) = d[static_cast<std::size_t>(i)];
    return a;
}

Vector DenseMatrix::column(int j) const {
    Vector col(static_cast<std::size_t>(rows_));
    for (int i = 0; i < rows_; ++i) col[static_cast<std::size_t>(i)] = (*this)(i, j);
    return col;
}

DenseMatrix DenseMatrix::transposed() const {
    DenseMatrix at(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) at(j, i) = (*this)(i, j);
    return at;
}

double DenseMatrix::max_abs() const noexcept {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

double DenseMatrix::frobenius_norm() const noexcept {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
}

double dot(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

double norm2_squared(std::span<const double> x) { return dot(x, x); }

double norm2(std::span<const double> x) { return std::sqrt(norm2_squared(x)); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void scale(std::span<double> x, double alpha) {
    for (double& v : x) v *= alpha;
}

double max_abs_diff(std::span<const double> x, std::span<const double> y) {
    double m = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
    return m;
}

bool all_finite(std::span<const double> x) {
    for (double v : x)
        if (!std::isfinite(v)) return false;
    return true;
}

} // namespace omegacond
