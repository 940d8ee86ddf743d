#include "omegacond/factor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "omegacond/kernels.hpp"

namespace omegacond {

SymPDMatrix::SymPDMatrix(const DenseMatrix& a) : matrix_(a.rows(), a.cols()) {
    if (a.rows() != a.cols())
        throw Error(ErrorCode::DimensionMismatch, "symmetric matrix must be square");
    const int n = a.rows();
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            const double aij = a(i, j), aji = a(j, i);
            if (std::abs(aij - aji) > kSymTol * std::max(1.0, std::abs(aij)))
                throw Error(ErrorCode::ParseError, "matrix is not symmetric at (" +
                                                       std::to_string(i) + "," + std::to_string(j) + ")");
            const double sym = 0.5 * (aij + aji);
            matrix_(i, j) = sym;
            matrix_(j, i) = sym;
        }
    }
}

double SymPDMatrix::trace() const noexcept {
    double t = 0.0;
    for (int i = 0; i < order(); ++i) t += matrix_(i, i);
    return t;
}

SymPDMatrix SymPDMatrix::shifted(double shift) const {
    DenseMatrix m = matrix_;
    for (int i = 0; i < order(); ++i) m(i, i) += shift;
    return SymPDMatrix(m);
}

namespace {

/// One cyclic Jacobi sweep over the strict upper triangle. Rotations are
/// applied two-sided with the eigenvector accumulator updated in step.
void jacobi_sweep(DenseMatrix& a, DenseMatrix& q, double rotate_threshold) {
    const int n = a.rows();
    for (int p = 0; p < n - 1; ++p) {
        for (int r = p + 1; r < n; ++r) {
            const double apr = a(p, r);
            if (std::abs(apr) <= rotate_threshold) continue;
            const double app = a(p, p);
            const double arr = a(r, r);
            const double theta = (arr - app) / (2.0 * apr);
            // smaller root of t^2 + 2 theta t - 1 = 0, stable form
            const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                             (std::abs(theta) + std::sqrt(theta * theta + 1.0));
            const double c = 1.0 / std::sqrt(t * t + 1.0);
            const double s = t * c;
            const double tau = s / (1.0 + c);

            a(p, p) = app - t * apr;
            a(r, r) = arr + t * apr;
            a(p, r) = 0.0;
            a(r, p) = 0.0;
#pragma omp simd
            for (int j = 0; j < n; ++j) {
                if (j != p && j != r) {
                    const double ajp = a(j, p);
                    const double ajr = a(j, r);
                    a(j, p) = ajp - s * (ajr + tau * ajp);
                    a(j, r) = ajr + s * (ajp - tau * ajr);
                    a(p, j) = a(j, p);
                    a(r, j) = a(j, r);
                }
                const double qjp = q(j, p);
                const double qjr = q(j, r);
                q(j, p) = qjp - s * (qjr + tau * qjp);
                q(j, r) = qjr + s * (qjp - tau * qjr);
            }
        }
    }
}

double max_offdiag(const DenseMatrix& a) {
    double m = 0.0;
    for (int i = 0; i < a.rows(); ++i)
        for (int j = i + 1; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j)));
    return m;
}

} // namespace

SpectralDecomp symmetric_eig(const SymPDMatrix& input) {
    constexpr int kMaxSweeps = 100;
    const int n = input.order();
    DenseMatrix a = input.matrix();
    DenseMatrix q = DenseMatrix::identity(n);
    const double threshold = 1e-14 * a.frobenius_norm();

    bool converged = (n == 1) || max_offdiag(a) <= threshold;
    for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
        jacobi_sweep(a, q, threshold);
        converged = max_offdiag(a) <= threshold;
    }
    if (!converged)
        throw Error(ErrorCode::NonConvergence, "Jacobi eigeniteration: sweep limit exceeded");

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&a](int lhs, int rhs) { return a(lhs, lhs) > a(rhs, rhs); });

    SpectralDecomp out{DenseMatrix(n, n), Vector(static_cast<std::size_t>(n))};
    for (int k = 0; k < n; ++k) {
        const int src = order[static_cast<std::size_t>(k)];
        out.d[static_cast<std::size_t>(k)] = a(src, src);
        for (int i = 0; i < n; ++i) out.q(i, k) = q(i, src);
    }
    return out;
}

CholeskyDecomp cholesky(const SymPDMatrix& a) {
    const int n = a.order();
    std::vector<double> work(a.matrix().data(), a.matrix().data() + static_cast<std::size_t>(n) * n);
    double bad_pivot = 0.0;
    const int fail = kernels::cholesky_inplace(work, n, &bad_pivot);
    if (fail >= 0)
        throw Error(ErrorCode::NotPositiveDefinite,
                    "Cholesky pivot " + std::to_string(fail) + " is " + std::to_string(bad_pivot),
                    fail);
    DenseMatrix l(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) l(i, j) = work[static_cast<std::size_t>(i) * n + j];
    return CholeskyDecomp{std::move(l)};
}

LUDecomp lu_pivoted(const DenseMatrix& a) {
    if (a.rows() != a.cols())
        throw Error(ErrorCode::DimensionMismatch, "LU requires a square matrix");
    const int n = a.rows();
    std::vector<double> work(a.data(), a.data() + static_cast<std::size_t>(n) * n);
    std::vector<int> perm;
    const double threshold = 1e-14 * a.max_abs();
    const int fail = kernels::lu_inplace(work, n, perm, threshold);
    if (fail >= 0)
        throw Error(ErrorCode::SingularMatrix, "vanishing pivot at elimination step " + std::to_string(fail),
                    fail);
    LUDecomp out{std::move(perm), DenseMatrix::identity(n), DenseMatrix(n, n)};
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < i; ++j) out.l(i, j) = work[static_cast<std::size_t>(i) * n + j];
        for (int j = i; j < n; ++j) out.ufac(i, j) = work[static_cast<std::size_t>(i) * n + j];
    }
    return out;
}

Vector solve_lower_triangular(const DenseMatrix& l, std::span<const double> b) {
    if (l.rows() != l.cols() || static_cast<std::size_t>(l.rows()) != b.size())
        throw Error(ErrorCode::DimensionMismatch, "triangular solve: shape mismatch");
    const int n = l.rows();
    Vector x(b.size());
    for (int i = 0; i < n; ++i) {
        double s = b[static_cast<std::size_t>(i)];
        for (int p = 0; p < i; ++p) s -= l(i, p) * x[static_cast<std::size_t>(p)];
        const double lii = l(i, i);
        if (lii == 0.0)
            throw Error(ErrorCode::SingularMatrix, "zero diagonal at row " + std::to_string(i), i);
        x[static_cast<std::size_t>(i)] = s / lii;
    }
    return x;
}

Vector solve_upper_triangular(const DenseMatrix& u, std::span<const double> b) {
    if (u.rows() != u.cols() || static_cast<std::size_t>(u.rows()) != b.size())
        throw Error(ErrorCode::DimensionMismatch, "triangular solve: shape mismatch");
    const int n = u.rows();
    Vector x(b.size());
    for (int i = n - 1; i >= 0; --i) {
        double s = b[static_cast<std::size_t>(i)];
        for (int p = i + 1; p < n; ++p) s -= u(i, p) * x[static_cast<std::size_t>(p)];
        const double uii = u(i, i);
        if (uii == 0.0)
            throw Error(ErrorCode::SingularMatrix, "zero diagonal at row " + std::to_string(i), i);
        x[static_cast<std::size_t>(i)] = s / uii;
    }
    return x;
}

Vector cholesky_solve(const CholeskyDecomp& chol, std::span<const double> b) {
    Vector y = solve_lower_triangular(chol.l, b);
    // L^T back substitution without materializing the transpose
    const int n = chol.l.rows();
    Vector x(y.size());
    for (int i = n - 1; i >= 0; --i) {
        double s = y[static_cast<std::size_t>(i)];
        for (int p = i + 1; p < n; ++p) s -= chol.l(p, i) * x[static_cast<std::size_t>(p)];
        x[static_cast<std::size_t>(i)] = s / chol.l(i, i);
    }
    return x;
}

const SpectralDecomp& FactorBundle::spectral() const {
    std::lock_guard<std::mutex> lock(mutex_);
    if (!spectral_) spectral_ = symmetric_eig(matrix_);
    return *spectral_;
}

const CholeskyDecomp& FactorBundle::cholesky() const {
    std::lock_guard<std::mutex> lock(mutex_);
    if (!cholesky_) cholesky_ = omegacond::cholesky(matrix_);
    return *cholesky_;
}

const LUDecomp& FactorBundle::lu() const {
    std::lock_guard<std::mutex> lock(mutex_);
    if (!lu_) lu_ = lu_pivoted(matrix_.matrix());
    return *lu_;
}

} // namespace omegacond
