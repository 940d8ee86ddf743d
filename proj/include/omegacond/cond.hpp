#pragma once

#include <span>
#include <string>

#include "omegacond/factor.hpp"

namespace omegacond {

/// kappa plus the three omega evaluations of one matrix, with the wall time
/// spent on each factorization-plus-evaluation.
struct CondReport {
    int n = 0;
    double kappa = 0.0;
    double omega_eig = 0.0;
    double omega_chol = 0.0;
    double omega_lu = 0.0;
    double t_eig = 0.0;
    double t_chol = 0.0;
    double t_lu = 0.0;

    static std::string csv_header();
    std::string csv_row() const;
};

/// lambda_max / lambda_min from the spectral decomposition.
double kappa(const SymPDMatrix& a);
double kappa(const SpectralDecomp& eig);

// The omega-condition number is the arithmetic over the geometric mean of the
// eigenvalues. All three evaluations take the n-th root of each factor before
// multiplying; forming the determinant first would underflow or overflow for
// modest n already (e.g. 0.5^50).

double omega_eig(const SymPDMatrix& a);
double omega_eig(const SpectralDecomp& eig, double trace);

double omega_chol(const SymPDMatrix& a);
double omega_chol(const CholeskyDecomp& chol, double trace);

double omega_lu(const SymPDMatrix& a);
double omega_lu(const LUDecomp& lu, double trace);

/// omega straight from a known spectrum; the reference value for matrices
/// constructed as Q diag(d) Q^T.
double omega_exact_from_spectrum(std::span<const double> d);

/// Runs all three factorizations on fresh copies, timing each one.
CondReport cond_report(const SymPDMatrix& a);

} // namespace omegacond
