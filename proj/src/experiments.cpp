#include "omegacond/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "omegacond/cond.hpp"
#include "omegacond/kernels.hpp"

namespace omegacond {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void append_17e(std::string& out, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17e", v);
    out += buf;
}

/// Sparse-normal fill: each entry is nonzero with the given probability and
/// standard normal when it is. Draw order is row-major and mask-before-value,
/// which pins the stream for reproducibility.
DenseMatrix sparse_normal(int rows, int cols, double density, Rng& rng) {
    DenseMatrix a(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
            if (rng.uniform() < density) a(i, j) = rng.normal();
    return a;
}

} // namespace

LowRankProblem generate_problem(int n, std::uint64_t seed) {
    if (n < 8)
        throw Error(ErrorCode::DimensionMismatch, "problem generation requires n >= 8");
    Rng rng(seed);
    const double log_n = std::log(static_cast<double>(n));

    const int r = static_cast<int>(rng.uniform_int(n / 2 + 1, n - 1));
    const double density_a = rng.uniform(0.005, 0.5 / log_n);
    const DenseMatrix a0 = sparse_normal(r, n, density_a, rng);
    // A0 is r x n, so the n x n Gram A0^T A0 has rank at most r < n.
    const DenseMatrix a = kernels::gram(a0);

    const double epsilon = rng.uniform(1e-9, 1e-7);
    const int t = static_cast<int>(rng.uniform_int(2, std::max(2, r / 2)));
    const double density_u = rng.uniform(0.005, 1.0 / log_n);
    DenseMatrix u = sparse_normal(n, t, density_u, rng);
    for (int j = 0; j < t; ++j) { // the update theory needs every column nonzero
        bool zero = true;
        while (zero) {
            for (int i = 0; i < n && zero; ++i) zero = u(i, j) == 0.0;
            if (!zero) break;
            for (int i = 0; i < n; ++i) u(i, j) = rng.uniform() < density_u ? rng.normal() : 0.0;
        }
    }

    Vector b1(static_cast<std::size_t>(n)), b2(static_cast<std::size_t>(t));
    for (double& v : b1) v = rng.normal();
    for (double& v : b2) v = rng.normal();
    Vector b(static_cast<std::size_t>(n));
    kernels::matvec(a, b1, b);
    Vector ub2(static_cast<std::size_t>(n));
    kernels::matvec(u, b2, ub2);
    axpy(1.0, ub2, b);

    LowRankProblem problem{SymPDMatrix(a), epsilon, std::move(u), std::move(b), seed, n, r, t};
    return problem;
}

LinearOperator LowRankProblem::make_operator(std::span<const double> gamma) const {
    if (gamma.size() != static_cast<std::size_t>(t))
        throw Error(ErrorCode::DimensionMismatch, "gamma length does not match update rank");
    LinearOperator op;
    op.rows = n;
    op.cols = n;
    Vector gamma_copy(gamma.begin(), gamma.end());
    // y = A x + eps x + U Diag(gamma) U^T x, cost n^2 + O(n t) per apply
    op.apply = [this, gamma_copy = std::move(gamma_copy)](std::span<const double> x,
                                                          std::span<double> y) {
        kernels::matvec(a.matrix(), x, y);
        Vector utx(static_cast<std::size_t>(t));
        kernels::matvec_transpose(u, x, utx);
        for (int j = 0; j < t; ++j) utx[static_cast<std::size_t>(j)] *= gamma_copy[static_cast<std::size_t>(j)];
        Vector update(static_cast<std::size_t>(n));
        kernels::matvec(u, utx, update);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += epsilon * x[i] + update[i];
    };
    op.apply_transpose = op.apply; // symmetric
    return op;
}

const char* policy_name(Policy policy) {
    switch (policy) {
        case Policy::Zero: return "zero";
        case Policy::Ones: return "ones";
        case Policy::InvNorm2: return "invnorm2";
        case Policy::OmegaProj: return "omegaProj";
    }
    return "unknown";
}

std::optional<Policy> parse_policy(const std::string& name) {
    if (name == "zero") return Policy::Zero;
    if (name == "ones") return Policy::Ones;
    if (name == "invnorm2") return Policy::InvNorm2;
    if (name == "omegaProj") return Policy::OmegaProj;
    return std::nullopt;
}

const char* solver_name(SolverKind solver) {
    return solver == SolverKind::Lsqr ? "lsqr" : "cgs";
}

std::optional<SolverKind> parse_solver(const std::string& name) {
    if (name == "lsqr") return SolverKind::Lsqr;
    if (name == "cgs") return SolverKind::Cgs;
    return std::nullopt;
}

const char* measure_name(Measure measure) {
    return measure == Measure::Time ? "time" : "iters";
}

std::optional<Measure> parse_measure(const std::string& name) {
    if (name == "time") return Measure::Time;
    if (name == "iters" || name == "iterations") return Measure::Iterations;
    return std::nullopt;
}

PolicyGamma policy_gamma(const LowRankProblem& problem, Policy policy) {
    const UpdateSpec spec(problem.regularized(), problem.u);
    const int t = problem.t;
    PolicyGamma out;
    out.result.policy = policy_name(policy);
    out.result.whitening = WhiteningSource::Cholesky;
    out.result.clamped = false;

    switch (policy) {
        case Policy::Zero:
            out.result.gamma.assign(static_cast<std::size_t>(t), 0.0);
            break;
        case Policy::Ones:
            out.result.gamma.assign(static_cast<std::size_t>(t), 1.0);
            break;
        case Policy::InvNorm2: {
            out.result.gamma.resize(static_cast<std::size_t>(t));
            for (int j = 0; j < t; ++j) {
                double norm_sq = 0.0;
                for (int i = 0; i < problem.n; ++i) norm_sq += problem.u(i, j) * problem.u(i, j);
                out.result.gamma[static_cast<std::size_t>(j)] = std::min(1.0, 1.0 / norm_sq);
            }
            break;
        }
        case Policy::OmegaProj: {
            // Both decomposition routes are timed end to end: factorization,
            // whitening, closed form, projection. The spectral gamma is the
            // one used downstream.
            auto start = Clock::now();
            const SpectralDecomp eig = symmetric_eig(spec.a);
            const Whitening wh_s = whiten(spec, eig);
            Vector gamma_s = project_box(gamma_rank_t_vector(spec, wh_s));
            out.gamma_time_spectral = seconds_since(start);

            start = Clock::now();
            const CholeskyDecomp chol = cholesky(spec.a);
            const Whitening wh_c = whiten(spec, chol);
            const Vector gamma_c = project_box(gamma_rank_t_vector(spec, wh_c));
            out.gamma_time_cholesky = seconds_since(start);

            out.result.whitening = WhiteningSource::Spectral;
            out.result.clamped = false;
            for (std::size_t j = 0; j < gamma_s.size(); ++j)
                out.result.clamped |= gamma_s[j] == 0.0 || gamma_s[j] == 1.0;
            out.result.gamma = std::move(gamma_s);
            out.result.kkt_residual = kkt_check_box(spec, wh_s, out.result.gamma);
            out.result.omega_value = omega_of_update(spec, out.result.gamma);
            (void)gamma_c;
            return out;
        }
    }

    const Whitening wh = whiten(spec, cholesky(spec.a));
    out.result.kkt_residual = kkt_check_box(spec, wh, out.result.gamma);
    out.result.omega_value = omega_of_update(spec, out.result.gamma);
    return out;
}

RunConfig parse_run_config(std::istream& in) {
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("run config: ") + e.what());
    }
    RunConfig config;
    try {
        config.sizes = j.at("sizes").get<std::vector<int>>();
        if (j.contains("instancesPerSize")) config.instances_per_size = j["instancesPerSize"].get<int>();
        if (j.contains("masterSeed")) config.master_seed = j["masterSeed"].get<std::uint64_t>();
        if (j.contains("tol")) config.tol = j["tol"].get<double>();
        if (j.contains("maxIter")) config.max_iterations = j["maxIter"].get<long>();
        if (j.contains("solvers")) {
            config.solvers.clear();
            for (const auto& name : j["solvers"]) {
                const auto solver = parse_solver(name.get<std::string>());
                if (!solver) throw Error(ErrorCode::ParseError, "unknown solver " + name.get<std::string>());
                config.solvers.push_back(*solver);
            }
        }
        if (j.contains("policies")) {
            config.policies.clear();
            for (const auto& name : j["policies"]) {
                const auto policy = parse_policy(name.get<std::string>());
                if (!policy) throw Error(ErrorCode::ParseError, "unknown policy " + name.get<std::string>());
                config.policies.push_back(*policy);
            }
        }
        if (j.contains("measure")) {
            const auto measure = parse_measure(j["measure"].get<std::string>());
            if (!measure) throw Error(ErrorCode::ParseError, "unknown measure");
            config.measure = *measure;
        }
        if (j.contains("jobs")) config.jobs = j["jobs"].get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("run config: ") + e.what());
    }
    if (config.sizes.empty()) throw Error(ErrorCode::EmptyRunSet, "config has no sizes");
    if (config.instances_per_size < 1) throw Error(ErrorCode::ParseError, "instancesPerSize must be >= 1");
    if (config.solvers.empty()) throw Error(ErrorCode::EmptyRunSet, "config has no solvers");
    if (config.policies.empty()) throw Error(ErrorCode::EmptyRunSet, "config has no policies");
    if (!(config.tol > 0.0)) throw Error(ErrorCode::ParseError, "tol must be positive");
    if (config.max_iterations < 1) throw Error(ErrorCode::ParseError, "maxIter must be >= 1");
    return config;
}

BenchmarkResult run_benchmark(const RunConfig& config) {
    if (config.sizes.empty()) throw Error(ErrorCode::EmptyRunSet, "no sizes requested");
    const int instances = config.instances_per_size;
    const std::size_t policies = config.policies.size();
    const std::size_t solvers = config.solvers.size();
    const std::size_t tasks = config.sizes.size() * static_cast<std::size_t>(instances);
    const std::size_t rows_per_task = policies * solvers;

    BenchmarkResult result;
    result.runs.assign(tasks * rows_per_task, PolicyRun{});

    const SolveConfig solve_config{config.tol, config.max_iterations};
    const int jobs = std::max(1, config.jobs);

    // One task per (size, instance); rows land in preassigned slots so the
    // output order does not depend on scheduling.
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs) if (jobs > 1)
    for (std::ptrdiff_t task = 0; task < static_cast<std::ptrdiff_t>(tasks); ++task) {
        const std::size_t size_index = static_cast<std::size_t>(task) / instances;
        const int instance = static_cast<int>(static_cast<std::size_t>(task) % instances);
        const int n = config.sizes[size_index];
        const std::uint64_t seed =
            Rng::derive_seed(config.master_seed, static_cast<std::uint64_t>(n),
                             static_cast<std::uint64_t>(instance));

        const LowRankProblem problem = generate_problem(n, seed);
        for (std::size_t pi = 0; pi < policies; ++pi) {
            const Policy policy = config.policies[pi];
            PolicyRun base;
            base.n = problem.n;
            base.r = problem.r;
            base.t = problem.t;
            base.instance = instance;
            base.policy = policy;

            bool policy_ok = true;
            PolicyGamma pg;
            try {
                pg = policy_gamma(problem, policy);
                const SymPDMatrix updated =
                    UpdateSpec(problem.regularized(), problem.u).updated(pg.result.gamma);
                base.kappa_a_gamma = kappa(symmetric_eig(updated));
                base.omega_a_gamma = pg.result.omega_value;
                base.gamma_time_spectral = pg.gamma_time_spectral;
                base.gamma_time_cholesky = pg.gamma_time_cholesky;
            } catch (const Error&) {
                // Failed gamma computation counts as a failed convergence
                // test for every solver cell of this policy.
                policy_ok = false;
                base.kappa_a_gamma = std::numeric_limits<double>::quiet_NaN();
                base.omega_a_gamma = std::numeric_limits<double>::quiet_NaN();
            }

            for (std::size_t si = 0; si < solvers; ++si) {
                PolicyRun row = base;
                row.solver = config.solvers[si];
                if (policy_ok) {
                    try {
                        const LinearOperator op = problem.make_operator(pg.result.gamma);
                        const SolveReport report =
                            row.solver == SolverKind::Lsqr ? lsqr(op, problem.b, solve_config)
                                                           : cgs(op, problem.b, solve_config);
                        row.rel_residual = report.rel_residual;
                        row.iterations = report.iterations;
                        row.wall_time = report.wall_time;
                        row.status = report.status;
                    } catch (const Error&) {
                        row.rel_residual = std::numeric_limits<double>::infinity();
                        row.status = SolveStatus::Stagnated;
                    }
                } else {
                    row.rel_residual = std::numeric_limits<double>::infinity();
                    row.status = SolveStatus::Stagnated;
                }
                result.runs[static_cast<std::size_t>(task) * rows_per_task + pi * solvers + si] =
                    std::move(row);
            }
        }
    }

    if (config.policies.size() >= 2) {
        std::vector<std::string> names;
        result.profile =
            performance_profile(profile_samples(result.runs, config.measure, config.tol, names), names);
    }
    return result;
}

std::vector<ProfileSample> profile_samples(const std::vector<PolicyRun>& runs, Measure measure,
                                           double pass_tol, std::vector<std::string>& policy_names_out) {
    std::map<std::tuple<int, int, int>, int> problem_ids; // (n, instance, solver) -> dense id
    std::map<std::string, int> policy_ids;
    std::vector<ProfileSample> samples;
    samples.reserve(runs.size());
    for (const PolicyRun& run : runs) {
        const auto problem_key = std::make_tuple(run.n, run.instance, static_cast<int>(run.solver));
        const auto [p_it, p_inserted] =
            problem_ids.emplace(problem_key, static_cast<int>(problem_ids.size()));
        const std::string name = policy_name(run.policy);
        const auto [g_it, g_inserted] = policy_ids.emplace(name, static_cast<int>(policy_ids.size()));
        if (g_inserted) policy_names_out.push_back(name);

        ProfileSample sample;
        sample.problem = p_it->second;
        sample.policy = g_it->second;
        sample.passed = run.rel_residual <= pass_tol;
        if (measure == Measure::Iterations) {
            sample.value = static_cast<double>(run.iterations);
        } else {
            sample.value = run.wall_time;
            if (run.policy == Policy::OmegaProj)
                sample.value += run.gamma_time_spectral; // gamma cost is part of the bill
        }
        samples.push_back(sample);
    }
    return samples;
}

ProfileTable performance_profile(const std::vector<ProfileSample>& samples,
                                 const std::vector<std::string>& policy_names) {
    if (samples.empty()) throw Error(ErrorCode::EmptyRunSet, "no profile samples");
    if (policy_names.size() < 2)
        throw Error(ErrorCode::EmptyRunSet, "performance profiles need at least two policies");

    int problems = 0;
    for (const ProfileSample& s : samples) problems = std::max(problems, s.problem + 1);
    const auto policies = policy_names.size();

    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> best(static_cast<std::size_t>(problems), kInf);
    for (const ProfileSample& s : samples)
        if (s.passed) best[static_cast<std::size_t>(s.problem)] =
            std::min(best[static_cast<std::size_t>(s.problem)], s.value);

    // ratios[policy][problem], +inf where the convergence test failed
    std::vector<std::vector<double>> ratios(policies,
                                            std::vector<double>(static_cast<std::size_t>(problems), kInf));
    for (const ProfileSample& s : samples) {
        if (!s.passed) continue;
        const double denom = best[static_cast<std::size_t>(s.problem)];
        ratios[static_cast<std::size_t>(s.policy)][static_cast<std::size_t>(s.problem)] =
            denom > 0.0 ? s.value / denom : 1.0;
    }

    constexpr int kGridPoints = 256;
    constexpr double kLog2Max = 10.0;
    ProfileTable table;
    table.policy_names = policy_names;
    table.tau.resize(kGridPoints);
    table.rho.assign(policies, std::vector<double>(kGridPoints, 0.0));
    for (int k = 0; k < kGridPoints; ++k)
        table.tau[static_cast<std::size_t>(k)] = std::exp2(kLog2Max * k / (kGridPoints - 1.0));
    table.tau[0] = 1.0;

    for (std::size_t g = 0; g < policies; ++g) {
        for (int k = 0; k < kGridPoints; ++k) {
            const double tau = table.tau[static_cast<std::size_t>(k)];
            int count = 0;
            for (int p = 0; p < problems; ++p)
                if (ratios[g][static_cast<std::size_t>(p)] <= tau) ++count;
            table.rho[g][static_cast<std::size_t>(k)] = static_cast<double>(count) / problems;
        }
    }
    return table;
}

std::string results_csv_header() {
    return "n,r,t,policy,solver,kappa,omega,relResidual,iterations,wallTime,gammaTimeSpec,gammaTimeChol";
}

std::string results_csv_row(const PolicyRun& run) {
    std::string row;
    row += std::to_string(run.n);
    row += ',';
    row += std::to_string(run.r);
    row += ',';
    row += std::to_string(run.t);
    row += ',';
    row += policy_name(run.policy);
    row += ',';
    row += solver_name(run.solver);
    for (double v : {run.kappa_a_gamma, run.omega_a_gamma, run.rel_residual}) {
        row += ',';
        append_17e(row, v);
    }
    row += ',';
    row += std::to_string(run.iterations);
    for (double v : {run.wall_time, run.gamma_time_spectral, run.gamma_time_cholesky}) {
        row += ',';
        append_17e(row, v);
    }
    return row;
}

std::vector<PolicyRun> read_results_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line))
        throw Error(ErrorCode::ParseError, "empty results file");
    if (line.rfind("n,", 0) != 0)
        throw Error(ErrorCode::ParseError, "results file is missing the header row");

    std::vector<PolicyRun> runs;
    std::map<std::tuple<int, std::string, std::string>, int> seen; // (n, policy, solver) -> count
    long line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string field;
        std::vector<std::string> cells;
        while (std::getline(fields, field, ',')) cells.push_back(field);
        if (cells.size() != 12)
            throw Error(ErrorCode::ParseError,
                        "results row " + std::to_string(line_number) + " has " +
                            std::to_string(cells.size()) + " fields, expected 12");
        PolicyRun run;
        try {
            run.n = std::stoi(cells[0]);
            run.r = std::stoi(cells[1]);
            run.t = std::stoi(cells[2]);
            const auto policy = parse_policy(cells[3]);
            const auto solver = parse_solver(cells[4]);
            if (!policy || !solver)
                throw Error(ErrorCode::ParseError, "unknown policy or solver in results row " +
                                                       std::to_string(line_number));
            run.policy = *policy;
            run.solver = *solver;
            run.kappa_a_gamma = std::stod(cells[5]);
            run.omega_a_gamma = std::stod(cells[6]);
            run.rel_residual = std::stod(cells[7]);
            run.iterations = std::stol(cells[8]);
            run.wall_time = std::stod(cells[9]);
            run.gamma_time_spectral = std::stod(cells[10]);
            run.gamma_time_cholesky = std::stod(cells[11]);
        } catch (const std::invalid_argument&) {
            throw Error(ErrorCode::ParseError, "unparsable number in results row " + std::to_string(line_number));
        } catch (const std::out_of_range&) {
            throw Error(ErrorCode::ParseError, "number out of range in results row " + std::to_string(line_number));
        }
        // each problem contributes one row per (policy, solver); the k-th
        // occurrence of a triple therefore belongs to instance k
        const auto key = std::make_tuple(run.n, cells[3], cells[4]);
        run.instance = seen[key]++;
        runs.push_back(std::move(run));
    }
    return runs;
}

void write_profile_csv(std::ostream& out, const ProfileTable& table) {
    std::string buffer = "tau";
    for (const std::string& name : table.policy_names) {
        buffer += ',';
        buffer += name;
    }
    buffer += '\n';
    for (std::size_t k = 0; k < table.tau.size(); ++k) {
        append_17e(buffer, table.tau[k]);
        for (std::size_t g = 0; g < table.policy_names.size(); ++g) {
            buffer += ',';
            append_17e(buffer, table.rho[g][k]);
        }
        buffer += '\n';
    }
    out << buffer;
}

std::string CondEstimateStudy::csv_header() {
    return "n,kappa,omega,eps,trials,redraws,ratioMax,ratioMean,ratioMedian";
}

std::string CondEstimateStudy::csv_row() const {
    std::string row = std::to_string(n);
    row += ',';
    append_17e(row, kappa);
    row += ',';
    append_17e(row, omega);
    row += ',';
    append_17e(row, eps);
    row += ',' + std::to_string(trials) + ',' + std::to_string(redraws);
    for (double v : {ratio_max, ratio_mean, ratio_median}) {
        row += ',';
        append_17e(row, v);
    }
    return row;
}

double perturbation_ratio(const SymPDMatrix& a, const Vector& b, const DenseMatrix& da,
                          const Vector& db, double eps) {
    const CholeskyDecomp chol = cholesky(a);
    const Vector x = cholesky_solve(chol, b);

    DenseMatrix perturbed = a.matrix();
    for (int i = 0; i < a.order(); ++i)
        for (int j = 0; j < a.order(); ++j) perturbed(i, j) += eps * da(i, j);
    Vector rhs = b;
    axpy(eps, db, rhs);
    const Vector x_perturbed = cholesky_solve(cholesky(SymPDMatrix(perturbed)), rhs);

    Vector dx = x_perturbed;
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] -= x[i];
    const double rho_a = eps * da.frobenius_norm() / a.matrix().frobenius_norm();
    const double rho_b = eps * norm2(db) / norm2(b);
    return (norm2(dx) / norm2(x)) / (rho_a + rho_b);
}

CondEstimateStudy estimate_cond(const SymPDMatrix& a, const Vector& b, int trials, double eps,
                                Rng& rng) {
    if (b.size() != static_cast<std::size_t>(a.order()))
        throw Error(ErrorCode::DimensionMismatch, "rhs length does not match matrix order");
    if (norm2(b) == 0.0) throw Error(ErrorCode::DimensionMismatch, "rhs must be nonzero");
    const int n = a.order();

    CondEstimateStudy study;
    study.n = n;
    study.eps = eps;
    study.trials = trials;
    const CholeskyDecomp chol = cholesky(a); // rejects non-PD input up front
    study.omega = omega_chol(chol, a.trace());
    study.kappa = kappa(symmetric_eig(a));

    const Vector x = cholesky_solve(chol, b);
    const double x_norm = norm2(x);
    const double b_norm = norm2(b);
    const double a_norm = a.matrix().frobenius_norm();

    study.ratios.reserve(static_cast<std::size_t>(trials));
    for (int trial = 0; trial < trials; ++trial) {
        while (true) {
            DenseMatrix da(n, n);
            for (int i = 0; i < n; ++i) {
                da(i, i) = rng.normal();
                for (int j = i + 1; j < n; ++j) {
                    const double g1 = rng.normal();
                    const double g2 = rng.normal();
                    da(i, j) = 0.5 * (g1 + g2);
                    da(j, i) = da(i, j);
                }
            }
            Vector db(static_cast<std::size_t>(n));
            for (double& v : db) v = rng.normal();

            DenseMatrix perturbed = a.matrix();
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) perturbed(i, j) += eps * da(i, j);
            CholeskyDecomp chol_perturbed;
            try {
                chol_perturbed = cholesky(SymPDMatrix(perturbed));
            } catch (const Error& err) {
                if (err.code() != ErrorCode::NotPositiveDefinite) throw;
                ++study.redraws; // perturbation pushed A out of the cone
                continue;
            }
            Vector rhs = b;
            axpy(eps, db, rhs);
            const Vector x_perturbed = cholesky_solve(chol_perturbed, rhs);
            Vector dx = x_perturbed;
            for (std::size_t i = 0; i < dx.size(); ++i) dx[i] -= x[i];
            const double rho_a = eps * da.frobenius_norm() / a_norm;
            const double rho_b = eps * norm2(db) / b_norm;
            study.ratios.push_back((norm2(dx) / x_norm) / (rho_a + rho_b));
            break;
        }
    }

    Vector sorted = study.ratios;
    std::sort(sorted.begin(), sorted.end());
    study.ratio_max = sorted.back();
    double sum = 0.0;
    for (double v : sorted) sum += v;
    study.ratio_mean = sum / static_cast<double>(trials);
    study.ratio_median = trials % 2 == 1
                             ? sorted[static_cast<std::size_t>(trials / 2)]
                             : 0.5 * (sorted[static_cast<std::size_t>(trials / 2 - 1)] +
                                      sorted[static_cast<std::size_t>(trials / 2)]);
    return study;
}

} // namespace omegacond
