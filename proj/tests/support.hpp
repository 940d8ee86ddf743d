#pragma once

// Shared generators for the test and acceptance suites.

#include <cmath>
#include <numeric>
#include <vector>

#include "omegacond/factor.hpp"
#include "omegacond/kernels.hpp"
#include "omegacond/lowrank.hpp"
#include "omegacond/rng.hpp"

namespace omegacond::testing {

inline DenseMatrix random_dense(int rows, int cols, Rng& rng) {
    DenseMatrix a(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) a(i, j) = rng.normal();
    return a;
}

inline Vector random_vector(int n, Rng& rng) {
    Vector v(static_cast<std::size_t>(n));
    for (double& x : v) x = rng.normal();
    return v;
}

/// Random SPD as G^T G + boost*I; boost keeps kappa moderate.
inline SymPDMatrix random_spd(int n, Rng& rng, double diag_boost = 1.0) {
    DenseMatrix g = random_dense(n, n, rng);
    DenseMatrix a = serial::gram(g);
    for (int i = 0; i < n; ++i) a(i, i) += diag_boost * n;
    return SymPDMatrix(a);
}

/// Random orthogonal matrix: the eigenvector basis of a random symmetric
/// matrix.
inline DenseMatrix random_orthogonal(int n, Rng& rng) {
    DenseMatrix g = random_dense(n, n, rng);
    DenseMatrix sym(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) sym(i, j) = 0.5 * (g(i, j) + g(j, i));
    return symmetric_eig(SymPDMatrix(sym)).q;
}

/// SPD matrix with a prescribed spectrum: A = (D^{1/2} Q^T)^T (D^{1/2} Q^T),
/// formed as a Gram product so it is exactly symmetric.
inline SymPDMatrix spd_with_spectrum(const Vector& spectrum, Rng& rng) {
    const int n = static_cast<int>(spectrum.size());
    const DenseMatrix q = random_orthogonal(n, rng);
    DenseMatrix m(n, n); // row i of M is sqrt(d_i) * (column i of Q)^T
    for (int i = 0; i < n; ++i) {
        const double root = std::sqrt(spectrum[static_cast<std::size_t>(i)]);
        for (int j = 0; j < n; ++j) m(i, j) = root * q(j, i);
    }
    return SymPDMatrix(serial::gram(m));
}

/// Log-uniform spectrum in [1/kappa, 1] with the extremes pinned so the
/// constructed matrix has condition number exactly kappa (up to roundoff).
inline Vector spectrum_with_kappa(int n, double kappa, Rng& rng) {
    Vector d(static_cast<std::size_t>(n));
    d[0] = 1.0;
    d[static_cast<std::size_t>(n - 1)] = 1.0 / kappa;
    for (int i = 1; i < n - 1; ++i)
        d[static_cast<std::size_t>(i)] = std::pow(10.0, -rng.uniform() * std::log10(kappa));
    return d;
}

/// Update instance whose whitened columns are exactly orthogonal: diagonal A
/// and disjoint column supports in U (each column gets a private index range).
inline UpdateSpec orthogonal_whitening_instance(int n, int t, Rng& rng) {
    Vector diag(static_cast<std::size_t>(n));
    for (double& v : diag) v = rng.uniform(0.5, 3.0);
    const int span = n / t;
    DenseMatrix u(n, t);
    for (int j = 0; j < t; ++j) {
        bool nonzero = false;
        for (int i = j * span; i < (j + 1) * span; ++i) {
            u(i, j) = rng.normal();
            nonzero |= u(i, j) != 0.0;
        }
        if (!nonzero) u(j * span, j) = 1.0;
    }
    return UpdateSpec(SymPDMatrix(DenseMatrix::diagonal(diag)), std::move(u));
}

/// The Example-with-failing-projection data: A = diag(1,2,2),
/// U = [(1/sqrt2, -1/sqrt2, 0)^T, (0,0,1)^T].
inline UpdateSpec projection_failure_instance() {
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    DenseMatrix u(3, 2);
    u(0, 0) = inv_sqrt2;
    u(1, 0) = -inv_sqrt2;
    u(2, 1) = 1.0;
    return UpdateSpec(SymPDMatrix(DenseMatrix::diagonal(std::vector<double>{1.0, 2.0, 2.0})),
                      std::move(u));
}

} // namespace omegacond::testing
