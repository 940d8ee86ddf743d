#include "omegacond/lowrank.hpp"

#include <cmath>

#include <json.hpp>

#include "omegacond/cond.hpp"
#include "omegacond/kernels.hpp"

namespace omegacond {

namespace {

// w_i with ||w_i||^2 below this multiple of ||u_i||^2 would blow up both the
// feasible-region bound and the gamma formulas.
constexpr double kDegenerateRatio = 1e-14;

void check_gamma_length(const UpdateSpec& spec, std::span<const double> gamma) {
    if (gamma.size() != static_cast<std::size_t>(spec.rank()))
        throw Error(ErrorCode::DimensionMismatch, "gamma length does not match update rank");
}

} // namespace

UpdateSpec::UpdateSpec(SymPDMatrix a_in, DenseMatrix u_in) : a(std::move(a_in)), u(std::move(u_in)) {
    if (u.rows() != a.order())
        throw Error(ErrorCode::DimensionMismatch, "U must have as many rows as A");
    if (u.cols() >= a.order())
        throw Error(ErrorCode::DimensionMismatch, "update rank t must satisfy t < n");
    for (int j = 0; j < u.cols(); ++j) {
        double norm_sq = 0.0;
        for (int i = 0; i < u.rows(); ++i) norm_sq += u(i, j) * u(i, j);
        if (norm_sq == 0.0)
            throw Error(ErrorCode::DegenerateColumn, "column " + std::to_string(j) + " of U is zero", j);
    }
}

SymPDMatrix UpdateSpec::updated(std::span<const double> gamma) const {
    check_gamma_length(*this, gamma);
    const int n = order(), t = rank();
    DenseMatrix m = a.matrix();
#pragma omp parallel for schedule(static) if (1L * n * n * t > (1 << 16))
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < t; ++k) s += gamma[static_cast<std::size_t>(k)] * u(i, k) * u(j, k);
            m(i, j) += s;
        }
    }
    return SymPDMatrix(m);
}

const char* whitening_name(WhiteningSource source) {
    return source == WhiteningSource::Spectral ? "spectral" : "cholesky";
}

namespace {

Whitening finish_whitening(const UpdateSpec& spec, DenseMatrix w, WhiteningSource source) {
    const int t = spec.rank();
    Whitening out{std::move(w), source, Vector(static_cast<std::size_t>(t)),
                  Vector(static_cast<std::size_t>(t))};
    for (int j = 0; j < t; ++j) {
        double u_sq = 0.0, w_sq = 0.0;
        for (int i = 0; i < spec.order(); ++i) {
            u_sq += spec.u(i, j) * spec.u(i, j);
            w_sq += out.w(i, j) * out.w(i, j);
        }
        if (w_sq < kDegenerateRatio * u_sq)
            throw Error(ErrorCode::DegenerateColumn,
                        "whitened column " + std::to_string(j) + " is numerically zero", j);
        out.col_norms_sq_u[static_cast<std::size_t>(j)] = u_sq;
        out.col_norms_sq_w[static_cast<std::size_t>(j)] = w_sq;
    }
    return out;
}

} // namespace

Whitening whiten(const UpdateSpec& spec, const SpectralDecomp& eig) {
    const int n = spec.order();
    if (!(eig.d.back() > 0.0))
        throw Error(ErrorCode::NotPositiveDefinite,
                    "smallest eigenvalue " + std::to_string(eig.d.back()) + " is not positive");
    // w = D^{-1/2} Q^T u, i.e. rows of Q^T U scaled by 1/sqrt(d_i)
    DenseMatrix w = kernels::matmul(eig.q.transposed(), spec.u);
    for (int i = 0; i < n; ++i) {
        const double inv_root = 1.0 / std::sqrt(eig.d[static_cast<std::size_t>(i)]);
        for (int j = 0; j < spec.rank(); ++j) w(i, j) *= inv_root;
    }
    return finish_whitening(spec, std::move(w), WhiteningSource::Spectral);
}

Whitening whiten(const UpdateSpec& spec, const CholeskyDecomp& chol) {
    return finish_whitening(spec, kernels::forward_solve_multi(chol.l, spec.u),
                            WhiteningSource::Cholesky);
}

Whitening whiten(const UpdateSpec& spec, WhiteningSource source) {
    if (source == WhiteningSource::Spectral) return whiten(spec, symmetric_eig(spec.a));
    return whiten(spec, cholesky(spec.a));
}

bool in_feasible_region(const Whitening& wh, std::span<const double> gamma) {
    for (std::size_t i = 0; i < gamma.size(); ++i)
        if (!(1.0 + gamma[i] * wh.col_norms_sq_w[i] > 0.0)) return false;
    return true;
}

double omega_of_update(const UpdateSpec& spec, std::span<const double> gamma) {
    return omega_chol(spec.updated(gamma));
}

namespace {

Vector gamma_closed_form(const UpdateSpec& spec, const Whitening& wh) {
    const int n = spec.order(), t = spec.rank();
    const double trace = spec.a.trace();
    const double n_minus_t = static_cast<double>(n - t);
    double ratio_sum = 0.0; // sum_j ||u_j||^2 / ||w_j||^2
    for (int j = 0; j < t; ++j)
        ratio_sum += wh.col_norms_sq_u[static_cast<std::size_t>(j)] /
                     wh.col_norms_sq_w[static_cast<std::size_t>(j)];
    Vector gamma(static_cast<std::size_t>(t));
    for (int i = 0; i < t; ++i) {
        const double u_sq = wh.col_norms_sq_u[static_cast<std::size_t>(i)];
        const double w_sq = wh.col_norms_sq_w[static_cast<std::size_t>(i)];
        const double own_ratio = u_sq / w_sq;
        gamma[static_cast<std::size_t>(i)] =
            (trace * w_sq - (n_minus_t + 1.0) * u_sq) / (n_minus_t * u_sq * w_sq) -
            (ratio_sum - own_ratio) / (n_minus_t * u_sq);
    }
    return gamma;
}

/// Assemble K(U) gamma = b(U) and solve it densely; the second, independent
/// rendering of the same stationarity system.
Vector gamma_from_linear_system(const UpdateSpec& spec, const Whitening& wh) {
    const int n = spec.order(), t = spec.rank();
    const double trace = spec.a.trace();
    DenseMatrix k(t, t);
    Vector rhs(static_cast<std::size_t>(t));
    for (int i = 0; i < t; ++i) {
        for (int j = 0; j < t; ++j)
            k(i, j) = (i == j ? n * wh.col_norms_sq_u[static_cast<std::size_t>(i)] : 0.0) -
                      wh.col_norms_sq_u[static_cast<std::size_t>(j)];
        rhs[static_cast<std::size_t>(i)] =
            trace - n * wh.col_norms_sq_u[static_cast<std::size_t>(i)] /
                        wh.col_norms_sq_w[static_cast<std::size_t>(i)];
    }
    const LUDecomp lu = lu_pivoted(k);
    Vector permuted(static_cast<std::size_t>(t));
    for (int i = 0; i < t; ++i)
        permuted[static_cast<std::size_t>(i)] = rhs[static_cast<std::size_t>(lu.perm[static_cast<std::size_t>(i)])];
    return solve_upper_triangular(lu.ufac, solve_lower_triangular(lu.l, permuted));
}

GammaResult finish_unconstrained(const UpdateSpec& spec, const Whitening& wh, Vector gamma,
                                 const char* policy) {
    if (!in_feasible_region(wh, gamma))
        throw Error(ErrorCode::FeasibilityViolation,
                    "closed-form gamma left the feasible region");
    GammaResult result;
    result.gamma = std::move(gamma);
    result.policy = policy;
    result.whitening = wh.source;
    result.clamped = false;
    try {
        result.omega_value = omega_of_update(spec, result.gamma); // Cholesky is authoritative
    } catch (const Error& err) {
        if (err.code() != ErrorCode::NotPositiveDefinite) throw;
        throw Error(ErrorCode::FeasibilityViolation,
                    "A(gamma) failed Cholesky at the closed-form optimum: " +
                        std::string(err.what()));
    }
    const OmegaGradient grad = omega_gradient(spec, wh, result.gamma);
    double residual = 0.0;
    for (double g : grad.gradient) residual = std::max(residual, std::abs(g));
    result.kkt_residual = residual;
    return result;
}

} // namespace

GammaResult gamma_rank_one(const UpdateSpec& spec, const Whitening& wh) {
    if (spec.rank() != 1)
        throw Error(ErrorCode::DimensionMismatch, "gamma_rank_one requires t = 1");
    const int n = spec.order();
    const double u_sq = wh.col_norms_sq_u[0];
    const double w_sq = wh.col_norms_sq_w[0];
    const double trace = spec.a.trace();
    Vector gamma{(trace * w_sq - n * u_sq) / ((n - 1.0) * u_sq * w_sq)};
    return finish_unconstrained(spec, wh, std::move(gamma), "omegaOpt");
}

Vector gamma_rank_t_vector(const UpdateSpec& spec, const Whitening& wh) {
    Vector closed = gamma_closed_form(spec, wh);
    const Vector solved = gamma_from_linear_system(spec, wh);
    double scale = 1.0;
    for (double g : closed) scale = std::max(scale, std::abs(g));
    if (max_abs_diff(closed, solved) > 1e-8 * scale)
        throw Error(ErrorCode::InternalConsistency,
                    "component formula and K(U) solve disagree beyond 1e-8");
    if (!in_feasible_region(wh, closed))
        throw Error(ErrorCode::FeasibilityViolation, "closed-form gamma left the feasible region");
    return closed;
}

GammaResult gamma_rank_t(const UpdateSpec& spec, const Whitening& wh) {
    return finish_unconstrained(spec, wh, gamma_rank_t_vector(spec, wh), "omegaOpt");
}

OmegaGradient omega_gradient(const UpdateSpec& spec, const Whitening& wh,
                             std::span<const double> gamma) {
    check_gamma_length(spec, gamma);
    if (!in_feasible_region(wh, gamma))
        throw Error(ErrorCode::OutsideDomain, "gamma is outside the feasible region");
    const int n = spec.order(), t = spec.rank();
    const double trace = spec.a.trace();

    double updated_trace_sum = trace;
    for (int i = 0; i < t; ++i)
        updated_trace_sum += gamma[static_cast<std::size_t>(i)] * wh.col_norms_sq_u[static_cast<std::size_t>(i)];

    // g(gamma) = det(A)^{1/n} prod_i (1 + gamma_i ||w_i||^2)^{1/n}, root-first
    const CholeskyDecomp chol = cholesky(spec.a);
    double g_value = 1.0;
    for (int i = 0; i < n; ++i) g_value *= std::pow(chol.l(i, i), 2.0 / n);
    for (int i = 0; i < t; ++i)
        g_value *= std::pow(1.0 + gamma[static_cast<std::size_t>(i)] * wh.col_norms_sq_w[static_cast<std::size_t>(i)],
                            1.0 / n);

    OmegaGradient out{Vector(static_cast<std::size_t>(t)), Vector(static_cast<std::size_t>(t))};
    for (int j = 0; j < t; ++j) {
        const double u_sq = wh.col_norms_sq_u[static_cast<std::size_t>(j)];
        const double w_sq = wh.col_norms_sq_w[static_cast<std::size_t>(j)];
        const double one_plus = 1.0 + gamma[static_cast<std::size_t>(j)] * w_sq;
        const double bracket = n * u_sq * one_plus - updated_trace_sum * w_sq;
        const double prefactor = 1.0 / (static_cast<double>(n) * n * g_value * one_plus);
        out.bracket[static_cast<std::size_t>(j)] = bracket;
        out.gradient[static_cast<std::size_t>(j)] = prefactor * bracket;
    }
    return out;
}

Vector project_box(std::span<const double> gamma) {
    Vector projected(gamma.begin(), gamma.end());
    for (double& g : projected) g = std::min(1.0, std::max(0.0, g));
    return projected;
}

GammaResult gamma_rank_one_box(const UpdateSpec& spec, const Whitening& wh) {
    const GammaResult unconstrained = gamma_rank_one(spec, wh);
    GammaResult result;
    result.gamma = project_box(unconstrained.gamma);
    result.policy = "omegaBox";
    result.whitening = wh.source;
    result.clamped = result.gamma[0] != unconstrained.gamma[0];
    result.kkt_residual = kkt_check_box(spec, wh, result.gamma);
    result.omega_value = omega_of_update(spec, result.gamma);
    return result;
}

double kkt_check_box(const UpdateSpec& spec, const Whitening& wh, std::span<const double> gamma) {
    check_gamma_length(spec, gamma);
    for (double g : gamma)
        if (g < 0.0 || g > 1.0)
            throw Error(ErrorCode::OutsideDomain, "gamma is outside [0,1]^t");
    const OmegaGradient grad = omega_gradient(spec, wh, gamma);
    // Multiplier signs: a coordinate at the lower bound needs nonnegative
    // derivative, one at the upper bound nonpositive, interior ones zero.
    double residual = 0.0;
    for (std::size_t j = 0; j < gamma.size(); ++j) {
        const double g = grad.gradient[j];
        double violation;
        if (gamma[j] == 0.0)
            violation = std::max(0.0, -g);
        else if (gamma[j] == 1.0)
            violation = std::max(0.0, g);
        else
            violation = std::abs(g);
        residual = std::max(residual, violation);
    }
    return residual;
}

std::string to_json(const GammaResult& result) {
    nlohmann::ordered_json j;
    j["policy"] = result.policy;
    j["gamma"] = result.gamma;
    j["clamped"] = result.clamped;
    j["kktResidual"] = result.kkt_residual;
    j["omega"] = result.omega_value;
    j["whitening"] = whitening_name(result.whitening);
    return j.dump();
}

} // namespace omegacond
