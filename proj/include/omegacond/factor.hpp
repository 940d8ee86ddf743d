#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

#include "omegacond/dense.hpp"

namespace omegacond {

/// Symmetric matrix with positive-definite intent. Construction symmetrizes
/// the input to (A + A^T)/2 after checking |a_ij - a_ji| against symTol;
/// definiteness itself is only asserted when a Cholesky is requested.
class SymPDMatrix {
public:
    static constexpr double kSymTol = 1e-12;

    explicit SymPDMatrix(const DenseMatrix& a);

    int order() const noexcept { return matrix_.rows(); }
    const DenseMatrix& matrix() const noexcept { return matrix_; }
    double operator()(int i, int j) const noexcept { return matrix_(i, j); }

    double trace() const noexcept;
    double max_abs() const noexcept { return matrix_.max_abs(); }

    /// A + shift*I
    SymPDMatrix shifted(double shift) const;

private:
    DenseMatrix matrix_;
};

/// A = Q diag(d) Q^T with eigenvalues sorted descending.
struct SpectralDecomp {
    DenseMatrix q;
    Vector d;
};

/// A = L L^T, L lower-triangular with positive diagonal.
struct CholeskyDecomp {
    DenseMatrix l;
};

/// P A = L U with partial row pivoting; perm[i] is the source row of row i.
struct LUDecomp {
    std::vector<int> perm;
    DenseMatrix l;    // unit lower-triangular
    DenseMatrix ufac; // upper-triangular
};

/// Cyclic Jacobi eigendecomposition. Converges when every off-diagonal
/// magnitude drops below 1e-14 * ||A||_F; throws NonConvergence after 100
/// sweeps.
SpectralDecomp symmetric_eig(const SymPDMatrix& a);

/// Throws NotPositiveDefinite naming the first failing pivot.
CholeskyDecomp cholesky(const SymPDMatrix& a);

/// Row-pivoted LU of a general square matrix; pivot threshold 1e-14 * ||A||_max.
LUDecomp lu_pivoted(const DenseMatrix& a);

Vector solve_lower_triangular(const DenseMatrix& l, std::span<const double> b);
Vector solve_upper_triangular(const DenseMatrix& u, std::span<const double> b);

/// Solve A x = b through an existing Cholesky factorization.
Vector cholesky_solve(const CholeskyDecomp& chol, std::span<const double> b);

/// On-demand cache of the three factorizations of one matrix. Lazy getters
/// are serialized by an internal mutex, so a shared bundle is safe to read
/// from several threads.
class FactorBundle {
public:
    explicit FactorBundle(SymPDMatrix a) : matrix_(std::move(a)) {}

    const SymPDMatrix& matrix() const noexcept { return matrix_; }
    const SpectralDecomp& spectral() const;
    const CholeskyDecomp& cholesky() const;
    const LUDecomp& lu() const;

private:
    SymPDMatrix matrix_;
    mutable std::mutex mutex_;
    mutable std::optional<SpectralDecomp> spectral_;
    mutable std::optional<CholeskyDecomp> cholesky_;
    mutable std::optional<LUDecomp> lu_;
};

} // namespace omegacond
