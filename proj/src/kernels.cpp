#include "omegacond/kernels.hpp"

#include <cmath>

namespace omegacond {

namespace {

// Below these sizes the fork/join overhead exceeds the loop body. Kernels
// that open one region per factorization step need a coarser grain than the
// single-region ones.
constexpr long kParallelFlopCutoff = 1 << 16;
constexpr long kParallelStepCutoff = 1 << 19;

inline double row_dot(const double* a, const double* b, int len) {
    double s = 0.0;
    for (int k = 0; k < len; ++k) s += a[k] * b[k];
    return s;
}

} // namespace

namespace serial {

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows())
        throw Error(ErrorCode::DimensionMismatch, "matmul: inner dimensions differ");
    const int m = a.rows(), k = a.cols(), n = b.cols();
    DenseMatrix c(m, n);
    for (int i = 0; i < m; ++i) {
        double* ci = c.data() + static_cast<std::size_t>(i) * n;
        const double* ai = a.data() + static_cast<std::size_t>(i) * k;
        for (int p = 0; p < k; ++p) {
            const double aip = ai[p];
            const double* bp = b.data() + static_cast<std::size_t>(p) * n;
            for (int j = 0; j < n; ++j) ci[j] += aip * bp[j];
        }
    }
    return c;
}

DenseMatrix gram(const DenseMatrix& a) {
    const int m = a.rows(), n = a.cols();
    DenseMatrix g(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            double s = 0.0;
            for (int p = 0; p < m; ++p) s += a(p, i) * a(p, j);
            g(i, j) = s;
            g(j, i) = s;
        }
    }
    return g;
}

void matvec(const DenseMatrix& a, std::span<const double> x, std::span<double> y) {
    const int m = a.rows(), n = a.cols();
    for (int i = 0; i < m; ++i) y[static_cast<std::size_t>(i)] = row_dot(a.data() + static_cast<std::size_t>(i) * n, x.data(), n);
}

void matvec_transpose(const DenseMatrix& a, std::span<const double> x, std::span<double> y) {
    const int m = a.rows(), n = a.cols();
    for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int i = 0; i < m; ++i) s += a(i, j) * x[static_cast<std::size_t>(i)];
        y[static_cast<std::size_t>(j)] = s;
    }
}

int cholesky_inplace(std::vector<double>& a, int n, double* bad_pivot) {
    for (int j = 0; j < n; ++j) {
        double* rowj = a.data() + static_cast<std::size_t>(j) * n;
        const double diag = rowj[j] - row_dot(rowj, rowj, j);
        if (!(diag > 0.0) || !std::isfinite(diag)) {
            if (bad_pivot) *bad_pivot = diag;
            return j;
        }
        const double ljj = std::sqrt(diag);
        rowj[j] = ljj;
        for (int i = j + 1; i < n; ++i) {
            double* rowi = a.data() + static_cast<std::size_t>(i) * n;
            rowi[j] = (rowi[j] - row_dot(rowi, rowj, j)) / ljj;
        }
    }
    return -1;
}

int lu_inplace(std::vector<double>& a, int n, std::vector<int>& perm, double pivot_threshold) {
    perm.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    for (int k = 0; k < n; ++k) {
        int pivot_row = k;
        double pivot_mag = std::abs(a[static_cast<std::size_t>(k) * n + k]);
        for (int i = k + 1; i < n; ++i) {
            const double mag = std::abs(a[static_cast<std::size_t>(i) * n + k]);
            if (mag > pivot_mag) {
                pivot_mag = mag;
                pivot_row = i;
            }
        }
        if (pivot_mag <= pivot_threshold) return k;
        if (pivot_row != k) {
            for (int j = 0; j < n; ++j)
                std::swap(a[static_cast<std::size_t>(k) * n + j], a[static_cast<std::size_t>(pivot_row) * n + j]);
            std::swap(perm[static_cast<std::size_t>(k)], perm[static_cast<std::size_t>(pivot_row)]);
        }
        const double* rowk = a.data() + static_cast<std::size_t>(k) * n;
        const double pivot = rowk[k];
        for (int i = k + 1; i < n; ++i) {
            double* rowi = a.data() + static_cast<std::size_t>(i) * n;
            const double factor = rowi[k] / pivot;
            rowi[k] = factor;
            for (int j = k + 1; j < n; ++j) rowi[j] -= factor * rowk[j];
        }
    }
    return -1;
}

DenseMatrix forward_solve_multi(const DenseMatrix& lower, const DenseMatrix& rhs) {
    if (lower.rows() != lower.cols() || lower.rows() != rhs.rows())
        throw Error(ErrorCode::DimensionMismatch, "forward_solve_multi: shape mismatch");
    const int n = lower.rows(), k = rhs.cols();
    DenseMatrix x(n, k);
    for (int c = 0; c < k; ++c) {
        for (int i = 0; i < n; ++i) {
            double s = rhs(i, c);
            for (int p = 0; p < i; ++p) s -= lower(i, p) * x(p, c);
            const double lii = lower(i, i);
            if (lii == 0.0)
                throw Error(ErrorCode::SingularMatrix, "zero diagonal in triangular solve", i);
            x(i, c) = s / lii;
        }
    }
    return x;
}

} // namespace serial

namespace kernels {

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows())
        throw Error(ErrorCode::DimensionMismatch, "matmul: inner dimensions differ");
    const int m = a.rows(), k = a.cols(), n = b.cols();
    const long flops = 2L * m * k * n;
    DenseMatrix c(m, n);
#pragma omp parallel for schedule(static) if (flops > kParallelFlopCutoff)
    for (int i = 0; i < m; ++i) {
        double* ci = c.data() + static_cast<std::size_t>(i) * n;
        const double* ai = a.data() + static_cast<std::size_t>(i) * k;
        for (int p = 0; p < k; ++p) {
            const double aip = ai[p];
            const double* bp = b.data() + static_cast<std::size_t>(p) * n;
            for (int j = 0; j < n; ++j) ci[j] += aip * bp[j];
        }
    }
    return c;
}

DenseMatrix gram(const DenseMatrix& a) {
    const int m = a.rows(), n = a.cols();
    const long flops = 1L * m * n * n;
    DenseMatrix g(n, n);
#pragma omp parallel for schedule(dynamic, 8) if (flops > kParallelFlopCutoff)
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            double s = 0.0;
            for (int p = 0; p < m; ++p) s += a(p, i) * a(p, j);
            g(i, j) = s;
            g(j, i) = s;
        }
    }
    return g;
}

void matvec(const DenseMatrix& a, std::span<const double> x, std::span<double> y) {
    const int m = a.rows(), n = a.cols();
#pragma omp parallel for schedule(static) if (2L * m * n > kParallelStepCutoff)
    for (int i = 0; i < m; ++i)
        y[static_cast<std::size_t>(i)] = row_dot(a.data() + static_cast<std::size_t>(i) * n, x.data(), n);
}

void matvec_transpose(const DenseMatrix& a, std::span<const double> x, std::span<double> y) {
    const int m = a.rows(), n = a.cols();
#pragma omp parallel for schedule(static) if (2L * m * n > kParallelStepCutoff)
    for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int i = 0; i < m; ++i) s += a(i, j) * x[static_cast<std::size_t>(i)];
        y[static_cast<std::size_t>(j)] = s;
    }
}

int cholesky_inplace(std::vector<double>& a, int n, double* bad_pivot) {
    // Right-looking column step: the pivot is serial, the updates of the rows
    // below it are independent (one writer per element, serial inner dot).
    for (int j = 0; j < n; ++j) {
        double* rowj = a.data() + static_cast<std::size_t>(j) * n;
        const double diag = rowj[j] - row_dot(rowj, rowj, j);
        if (!(diag > 0.0) || !std::isfinite(diag)) {
            if (bad_pivot) *bad_pivot = diag;
            return j;
        }
        const double ljj = std::sqrt(diag);
        rowj[j] = ljj;
#pragma omp parallel for schedule(static) if (2L * (n - j) * j > kParallelStepCutoff)
        for (int i = j + 1; i < n; ++i) {
            double* rowi = a.data() + static_cast<std::size_t>(i) * n;
            rowi[j] = (rowi[j] - row_dot(rowi, rowj, j)) / ljj;
        }
    }
    return -1;
}

int lu_inplace(std::vector<double>& a, int n, std::vector<int>& perm, double pivot_threshold) {
    perm.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    for (int k = 0; k < n; ++k) {
        int pivot_row = k;
        double pivot_mag = std::abs(a[static_cast<std::size_t>(k) * n + k]);
        for (int i = k + 1; i < n; ++i) {
            const double mag = std::abs(a[static_cast<std::size_t>(i) * n + k]);
            if (mag > pivot_mag) {
                pivot_mag = mag;
                pivot_row = i;
            }
        }
        if (pivot_mag <= pivot_threshold) return k;
        if (pivot_row != k) {
            for (int j = 0; j < n; ++j)
                std::swap(a[static_cast<std::size_t>(k) * n + j], a[static_cast<std::size_t>(pivot_row) * n + j]);
            std::swap(perm[static_cast<std::size_t>(k)], perm[static_cast<std::size_t>(pivot_row)]);
        }
        const double* rowk = a.data() + static_cast<std::size_t>(k) * n;
        const double pivot = rowk[k];
#pragma omp parallel for schedule(static) if (2L * (n - k) * (n - k) > kParallelStepCutoff)
        for (int i = k + 1; i < n; ++i) {
            double* rowi = a.data() + static_cast<std::size_t>(i) * n;
            const double factor = rowi[k] / pivot;
            rowi[k] = factor;
            for (int j = k + 1; j < n; ++j) rowi[j] -= factor * rowk[j];
        }
    }
    return -1;
}

DenseMatrix forward_solve_multi(const DenseMatrix& lower, const DenseMatrix& rhs) {
    if (lower.rows() != lower.cols() || lower.rows() != rhs.rows())
        throw Error(ErrorCode::DimensionMismatch, "forward_solve_multi: shape mismatch");
    const int n = lower.rows(), k = rhs.cols();
    DenseMatrix x(n, k);
    int bad_row = -1;
#pragma omp parallel for schedule(static) if (1L * n * n * k > kParallelFlopCutoff)
    for (int c = 0; c < k; ++c) {
        for (int i = 0; i < n; ++i) {
            double s = rhs(i, c);
            for (int p = 0; p < i; ++p) s -= lower(i, p) * x(p, c);
            const double lii = lower(i, i);
            if (lii == 0.0) {
#pragma omp atomic write
                bad_row = i;
                break;
            }
            x(i, c) = s / lii;
        }
    }
    if (bad_row >= 0)
        throw Error(ErrorCode::SingularMatrix, "zero diagonal in triangular solve", bad_row);
    return x;
}

} // namespace kernels

} // namespace omegacond
