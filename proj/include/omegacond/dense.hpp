#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "omegacond/errors.hpp"

namespace omegacond {

using Vector = std::vector<double>;

/// Dense row-major matrix. Entries are validated finite on construction.
class DenseMatrix {
public:
    DenseMatrix() = default;

    DenseMatrix(int rows, int cols);
    DenseMatrix(int rows, int cols, Vector entries);

    static DenseMatrix identity(int n);
    static DenseMatrix diagonal(std::span<const double> d);

    int rows() const noexcept { return rows_; }
    int cols() const noexcept { return cols_; }

    double& operator()(int i, int j) noexcept { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const noexcept { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

    double* data() noexcept { return data_.data(); }
    const double* data() const noexcept { return data_.data(); }
    std::span<const double> row(int i) const { return {data_.data() + static_cast<std::size_t>(i) * cols_, static_cast<std::size_t>(cols_)}; }

    Vector column(int j) const;
    DenseMatrix transposed() const;

    /// max_ij |a_ij|
    double max_abs() const noexcept;
    double frobenius_norm() const noexcept;

    bool same_shape(const DenseMatrix& other) const noexcept {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

private:
    int rows_ = 0;
    int cols_ = 0;
    Vector data_;

    void check_shape_and_entries() const;
};

// Small vector helpers. These stay serial: at n <= 2000 the O(n) work is
// negligible next to the O(n^2) kernels, and a fixed summation order keeps
// results independent of the thread count.
double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);
double norm2_squared(std::span<const double> x);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void scale(std::span<double> x, double alpha);
double max_abs_diff(std::span<const double> x, std::span<const double> y);
bool all_finite(std::span<const double> x);

} // namespace omegacond
