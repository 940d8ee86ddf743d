#pragma once

#include <functional>
#include <span>
#include <string>

#include "omegacond/dense.hpp"

namespace omegacond {

/// Matrix action y = A x (and y = A^T x). apply_transpose may equal apply for
/// symmetric operators.
struct LinearOperator {
    int rows = 0;
    int cols = 0;
    std::function<void(std::span<const double>, std::span<double>)> apply;
    std::function<void(std::span<const double>, std::span<double>)> apply_transpose;
};

LinearOperator dense_operator(const DenseMatrix& a);

struct SolveConfig {
    double tol = 1e-12;
    long max_iterations = 50000;
};

enum class SolveStatus { Converged, MaxIter, Stagnated };

const char* solve_status_name(SolveStatus status);

struct SolveReport {
    Vector x;
    double rel_residual = 0.0; // recomputed as ||b - A x|| / ||b|| on exit
    long iterations = 0;
    double wall_time = 0.0;
    SolveStatus status = SolveStatus::MaxIter;
};

/// LSQR (Golub-Kahan bidiagonalization) for square or rectangular actions.
/// Converged means the recomputed true residual meets tol; the recurrence
/// estimate only schedules the check. Stagnates when the relative step stays
/// below 2^-52 * ||x|| for two consecutive iterations.
SolveReport lsqr(const LinearOperator& op, std::span<const double> b, const SolveConfig& config);

/// Conjugate Gradient Squared for square actions; breakdown (rho or sigma
/// vanishing, or non-finite iterates) reports as Stagnated.
SolveReport cgs(const LinearOperator& op, std::span<const double> b, const SolveConfig& config);

} // namespace omegacond
