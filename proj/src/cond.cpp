#include "omegacond/cond.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

namespace omegacond {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

/// (trace/n) / prod(factors_i^{expo/n}), rooting every factor before it
/// enters the product so neither 0.5^n nor 2^n is ever formed.
double omega_from_factors(double trace, std::span<const double> factors, double expo) {
    const auto n = static_cast<double>(factors.size());
    double geometric = 1.0;
    for (double f : factors) geometric *= std::pow(f, expo / n);
    return (trace / n) / geometric;
}

void append_17e(std::string& out, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17e", v);
    out += buf;
}

} // namespace

std::string CondReport::csv_header() {
    return "n,kappa,omega_eig,omega_R,omega_LU,t_eig,t_R,t_LU";
}

std::string CondReport::csv_row() const {
    std::string row = std::to_string(n);
    for (double v : {kappa, omega_eig, omega_chol, omega_lu, t_eig, t_chol, t_lu}) {
        row += ',';
        append_17e(row, v);
    }
    return row;
}

double kappa(const SpectralDecomp& eig) {
    const double d_min = eig.d.back();
    if (!(d_min > 0.0))
        throw Error(ErrorCode::NotPositiveDefinite,
                    "smallest eigenvalue " + std::to_string(d_min) + " is not positive");
    return eig.d.front() / d_min;
}

double kappa(const SymPDMatrix& a) { return kappa(symmetric_eig(a)); }

double omega_eig(const SpectralDecomp& eig, double trace) {
    if (!(eig.d.back() > 0.0))
        throw Error(ErrorCode::NotPositiveDefinite,
                    "smallest eigenvalue " + std::to_string(eig.d.back()) + " is not positive");
    return omega_from_factors(trace, eig.d, 1.0);
}

double omega_eig(const SymPDMatrix& a) { return omega_eig(symmetric_eig(a), a.trace()); }

double omega_chol(const CholeskyDecomp& chol, double trace) {
    const int n = chol.l.rows();
    Vector diag(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) diag[static_cast<std::size_t>(i)] = chol.l(i, i);
    return omega_from_factors(trace, diag, 2.0);
}

double omega_chol(const SymPDMatrix& a) { return omega_chol(cholesky(a), a.trace()); }

double omega_lu(const LUDecomp& lu, double trace) {
    const int n = lu.ufac.rows();
    Vector diag(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) diag[static_cast<std::size_t>(i)] = std::abs(lu.ufac(i, i));
    return omega_from_factors(trace, diag, 1.0);
}

double omega_lu(const SymPDMatrix& a) { return omega_lu(lu_pivoted(a.matrix()), a.trace()); }

double omega_exact_from_spectrum(std::span<const double> d) {
    double trace = 0.0;
    for (double v : d) {
        if (!(v > 0.0))
            throw Error(ErrorCode::NonPositiveEigenvalue, "eigenvalue " + std::to_string(v));
        trace += v;
    }
    return omega_from_factors(trace, d, 1.0);
}

CondReport cond_report(const SymPDMatrix& a) {
    CondReport report;
    report.n = a.order();
    const double trace = a.trace();

    // Each path is timed with its own factorization; no sharing through a
    // FactorBundle, otherwise the timing columns would not be comparable.
    // Cholesky goes first: a non-PD input then fails naming its pivot.
    auto start = std::chrono::steady_clock::now();
    report.omega_chol = omega_chol(cholesky(a), trace);
    report.t_chol = seconds_since(start);

    start = std::chrono::steady_clock::now();
    report.omega_lu = omega_lu(lu_pivoted(a.matrix()), trace);
    report.t_lu = seconds_since(start);

    start = std::chrono::steady_clock::now();
    const SpectralDecomp eig = symmetric_eig(a);
    report.omega_eig = omega_eig(eig, trace);
    report.t_eig = seconds_since(start);
    report.kappa = kappa(eig);

    constexpr double kFloor = 1.0 - 1e-10;
    if (report.kappa < kFloor || report.omega_eig < kFloor || report.omega_chol < kFloor ||
        report.omega_lu < kFloor)
        throw Error(ErrorCode::InternalConsistency, "condition measure below the AM-GM floor");
    return report;
}

} // namespace omegacond
