#include "omegacond/solvers.hpp"

#include <chrono>
#include <cmath>

#include "omegacond/kernels.hpp"

namespace omegacond {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

/// ||b - A x|| / ||b||, recomputed from scratch. Every reported residual goes
/// through here so the reports cannot drift from the recurrences.
double true_rel_residual(const LinearOperator& op, std::span<const double> b,
                         std::span<const double> x, double b_norm, Vector& work) {
    work.resize(b.size());
    op.apply(x, work);
    double s = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        const double r = b[i] - work[i];
        s += r * r;
    }
    return std::sqrt(s) / b_norm;
}

/// Stops once two consecutive iterations are effectively the same point:
/// relative step at or below one ulp of ||x|| twice in a row.
class StagnationDetector {
public:
    bool update(double step_norm, double x_norm) {
        const double threshold = std::max(0x1.0p-52 * x_norm, 1e-300);
        if (step_norm <= threshold)
            ++consecutive_;
        else
            consecutive_ = 0;
        return consecutive_ >= 2;
    }

private:
    int consecutive_ = 0;
};

} // namespace

const char* solve_status_name(SolveStatus status) {
    switch (status) {
        case SolveStatus::Converged: return "Converged";
        case SolveStatus::MaxIter: return "MaxIter";
        case SolveStatus::Stagnated: return "Stagnated";
    }
    return "Unknown";
}

LinearOperator dense_operator(const DenseMatrix& a) {
    LinearOperator op;
    op.rows = a.rows();
    op.cols = a.cols();
    op.apply = [&a](std::span<const double> x, std::span<double> y) { kernels::matvec(a, x, y); };
    op.apply_transpose = [&a](std::span<const double> x, std::span<double> y) {
        kernels::matvec_transpose(a, x, y);
    };
    return op;
}

SolveReport lsqr(const LinearOperator& op, std::span<const double> b, const SolveConfig& config) {
    if (static_cast<std::size_t>(op.rows) != b.size())
        throw Error(ErrorCode::DimensionMismatch, "lsqr: rhs length does not match rows");
    const auto start = Clock::now();
    const std::size_t m = b.size();
    const std::size_t n = static_cast<std::size_t>(op.cols);
    const auto& apply_t = op.apply_transpose ? op.apply_transpose : op.apply;

    SolveReport report;
    report.x.assign(n, 0.0);
    const double b_norm = norm2(b);
    Vector residual_work;
    if (b_norm == 0.0) {
        report.status = SolveStatus::Converged;
        report.wall_time = seconds_since(start);
        return report;
    }

    // Golub-Kahan bidiagonalization started from b.
    Vector u(b.begin(), b.end());
    double beta = b_norm;
    scale(u, 1.0 / beta);
    Vector v(n);
    apply_t(u, v);
    double alpha = norm2(v);
    if (alpha == 0.0) { // b is orthogonal to the range of A; x = 0 is optimal
        report.status = SolveStatus::Stagnated;
        report.rel_residual = 1.0;
        report.wall_time = seconds_since(start);
        return report;
    }
    scale(v, 1.0 / alpha);
    Vector w = v;
    double phi_bar = beta;
    double rho_bar = alpha;

    Vector au(m), atv(n);
    StagnationDetector stagnation;
    SolveStatus status = SolveStatus::MaxIter;
    long k = 0;
    while (k < config.max_iterations) {
        ++k;
        // next column of the bidiagonalization
        op.apply(v, au);
        for (std::size_t i = 0; i < m; ++i) au[i] -= alpha * u[i];
        beta = norm2(au);
        if (beta > 0.0) {
            u = au;
            scale(u, 1.0 / beta);
        }
        apply_t(u, atv);
        for (std::size_t i = 0; i < n; ++i) atv[i] -= beta * v[i];
        alpha = norm2(atv);
        if (alpha > 0.0) {
            v = atv;
            scale(v, 1.0 / alpha);
        }

        // plane rotation eliminating beta from the lower bidiagonal
        const double rho = std::hypot(rho_bar, beta);
        const double c = rho_bar / rho;
        const double s = beta / rho;
        const double theta = s * alpha;
        rho_bar = -c * alpha;
        const double phi = c * phi_bar;
        phi_bar = s * phi_bar;

        const double step = phi / rho;
        double step_norm_sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double dx = step * w[i];
            report.x[i] += dx;
            step_norm_sq += dx * dx;
            w[i] = v[i] - (theta / rho) * w[i];
        }

        // phi_bar estimates ||b - A x||; trust it only to schedule the
        // honest check.
        if (std::abs(phi_bar) / b_norm <= config.tol) {
            if (true_rel_residual(op, b, report.x, b_norm, residual_work) <= config.tol) {
                status = SolveStatus::Converged;
                break;
            }
        }
        if (!std::isfinite(phi_bar) || !std::isfinite(step)) {
            status = SolveStatus::Stagnated;
            break;
        }
        if (stagnation.update(std::sqrt(step_norm_sq), norm2(report.x))) {
            status = SolveStatus::Stagnated;
            break;
        }
    }

    report.status = status;
    report.iterations = k;
    report.rel_residual = true_rel_residual(op, b, report.x, b_norm, residual_work);
    if (report.status == SolveStatus::Converged && report.rel_residual > config.tol)
        report.status = SolveStatus::Stagnated; // honest check disagreed at the last moment
    report.wall_time = seconds_since(start);
    return report;
}

SolveReport cgs(const LinearOperator& op, std::span<const double> b, const SolveConfig& config) {
    if (op.rows != op.cols)
        throw Error(ErrorCode::DimensionMismatch, "cgs requires a square operator");
    if (static_cast<std::size_t>(op.rows) != b.size())
        throw Error(ErrorCode::DimensionMismatch, "cgs: rhs length does not match rows");
    const auto start = Clock::now();
    const std::size_t n = b.size();

    SolveReport report;
    report.x.assign(n, 0.0);
    const double b_norm = norm2(b);
    Vector residual_work;
    if (b_norm == 0.0) {
        report.status = SolveStatus::Converged;
        report.wall_time = seconds_since(start);
        return report;
    }

    Vector r(b.begin(), b.end()); // r = b - A*0
    const Vector r_shadow = r;
    Vector u(n, 0.0), p(n, 0.0), q(n, 0.0), v_hat(n), u_hat(n), q_hat(n);
    double rho_prev = 1.0;
    constexpr double kBreakdown = 1e-300;

    // The CGS residual polynomial is squared, so the iteration can diverge on
    // ill-conditioned systems; keep the best iterate seen and report that.
    Vector x_best = report.x;
    double best_estimate = 1.0;

    StagnationDetector stagnation;
    SolveStatus status = SolveStatus::MaxIter;
    long k = 0;
    while (k < config.max_iterations) {
        ++k;
        const double rho = dot(r_shadow, r);
        if (std::abs(rho) < kBreakdown || !std::isfinite(rho)) {
            status = SolveStatus::Stagnated; // rho breakdown
            break;
        }
        if (k == 1) {
            u = r;
            p = u;
        } else {
            const double beta = rho / rho_prev;
            for (std::size_t i = 0; i < n; ++i) {
                u[i] = r[i] + beta * q[i];
                p[i] = u[i] + beta * (q[i] + beta * p[i]);
            }
        }
        op.apply(p, v_hat);
        const double sigma = dot(r_shadow, v_hat);
        if (std::abs(sigma) < kBreakdown || !std::isfinite(sigma)) {
            status = SolveStatus::Stagnated; // sigma breakdown
            break;
        }
        const double alpha = rho / sigma;
        for (std::size_t i = 0; i < n; ++i) {
            q[i] = u[i] - alpha * v_hat[i];
            u_hat[i] = u[i] + q[i];
        }
        double step_norm_sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double dx = alpha * u_hat[i];
            report.x[i] += dx;
            step_norm_sq += dx * dx;
        }
        op.apply(u_hat, q_hat);
        for (std::size_t i = 0; i < n; ++i) r[i] -= alpha * q_hat[i];
        rho_prev = rho;

        const double rel_estimate = norm2(r) / b_norm;
        if (std::isfinite(rel_estimate) && all_finite(report.x) && rel_estimate < best_estimate) {
            best_estimate = rel_estimate;
            x_best = report.x;
        }
        if (rel_estimate <= config.tol) {
            if (true_rel_residual(op, b, report.x, b_norm, residual_work) <= config.tol) {
                status = SolveStatus::Converged;
                break;
            }
        }
        if (!std::isfinite(rel_estimate) || !all_finite(report.x)) {
            status = SolveStatus::Stagnated;
            break;
        }
        if (stagnation.update(std::sqrt(step_norm_sq), norm2(report.x))) {
            status = SolveStatus::Stagnated;
            break;
        }
    }

    if (status != SolveStatus::Converged) report.x = std::move(x_best);
    report.status = status;
    report.iterations = k;
    report.rel_residual = true_rel_residual(op, b, report.x, b_norm, residual_work);
    if (report.status == SolveStatus::Converged && report.rel_residual > config.tol)
        report.status = SolveStatus::Stagnated;
    report.wall_time = seconds_since(start);
    return report;
}

} // namespace omegacond
