#pragma once

#include <span>
#include <string>
#include <vector>

#include "omegacond/factor.hpp"

namespace omegacond {

/// The update A(gamma) = A + U Diag(gamma) U^T with U n x t, t < n and every
/// column of U nonzero.
struct UpdateSpec {
    SymPDMatrix a;
    DenseMatrix u;

    UpdateSpec(SymPDMatrix a_in, DenseMatrix u_in);

    int order() const noexcept { return a.order(); }
    int rank() const noexcept { return u.cols(); }

    /// A + U Diag(gamma) U^T, formed densely.
    SymPDMatrix updated(std::span<const double> gamma) const;
};

enum class WhiteningSource { Spectral, Cholesky };

const char* whitening_name(WhiteningSource source);

/// Whitened update columns w_i (spectral: D^{-1/2} Q^T u_i, Cholesky:
/// L^{-1} u_i) with the squared column norms of U and W cached. Only the
/// squared norms enter the gamma formulas; the two sources agree on them.
struct Whitening {
    DenseMatrix w;
    WhiteningSource source;
    Vector col_norms_sq_u;
    Vector col_norms_sq_w;
};

Whitening whiten(const UpdateSpec& spec, WhiteningSource source);
Whitening whiten(const UpdateSpec& spec, const SpectralDecomp& eig);
Whitening whiten(const UpdateSpec& spec, const CholeskyDecomp& chol);

/// Open feasibility box: gamma_i > -1 / ||w_i||^2 for every i.
bool in_feasible_region(const Whitening& wh, std::span<const double> gamma);

/// Preconditioner vector with provenance. omega_value is always the exact
/// omega of A(gamma), evaluated by forming the update and running the
/// Cholesky path; kkt_residual is the stationarity residual at gamma (box
/// conditions when the result lives in [0,1]^t, plain gradient magnitude
/// otherwise).
struct GammaResult {
    Vector gamma;
    std::string policy;
    WhiteningSource whitening;
    bool clamped = false;
    double kkt_residual = 0.0;
    double omega_value = 0.0;
};

/// Closed-form optimal gamma for a rank-one update (t = 1).
GammaResult gamma_rank_one(const UpdateSpec& spec, const Whitening& wh);

/// Closed-form optimal gamma for a rank-t update. Cross-checks the
/// component formula against a direct dense solve of K(U) gamma = b(U) and
/// throws InternalConsistency when the two renderings disagree; throws
/// FeasibilityViolation when the result leaves the feasible region or the
/// Cholesky of A(gamma) fails.
GammaResult gamma_rank_t(const UpdateSpec& spec, const Whitening& wh);

/// The bare gamma* of gamma_rank_t (formula, cross-check, feasible-region
/// test) without the omega evaluation; this is what the benchmark times.
Vector gamma_rank_t_vector(const UpdateSpec& spec, const Whitening& wh);

/// Exact omega(A(gamma)): forms the update densely and evaluates through
/// Cholesky. This is the ground-truth evaluator used for every reported
/// omega value.
double omega_of_update(const UpdateSpec& spec, std::span<const double> gamma);

/// Analytic gradient of omega(gamma) together with the bracket
/// n ||u_j||^2 (1 + gamma_j ||w_j||^2) - (tr A + gamma . norms2(U)) ||w_j||^2
/// whose sign pattern determines stationarity (the prefactor is positive).
/// The gradient is exact when the whitened columns are orthogonal; the
/// bracket is reported separately so callers can log the residual otherwise.
struct OmegaGradient {
    Vector gradient;
    Vector bracket;
};

OmegaGradient omega_gradient(const UpdateSpec& spec, const Whitening& wh,
                             std::span<const double> gamma);

/// Componentwise clamp onto [0,1]^t.
Vector project_box(std::span<const double> gamma);

/// Exact box-constrained optimum for t = 1: clamp(gamma*, 0, 1).
GammaResult gamma_rank_one_box(const UpdateSpec& spec, const Whitening& wh);

/// Max violation of the box KKT conditions at gamma in [0,1]^t: interior
/// coordinates need zero gradient, gamma_j = 0 needs gradient >= 0 and
/// gamma_j = 1 needs gradient <= 0. Zero certifies global optimality on the
/// box by pseudoconvexity.
double kkt_check_box(const UpdateSpec& spec, const Whitening& wh,
                     std::span<const double> gamma);

/// {"policy": ..., "gamma": [...], "clamped": ..., "kktResidual": ...,
///  "omega": ..., "whitening": ...}
std::string to_json(const GammaResult& result);

} // namespace omegacond
