#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "omegacond/lowrank.hpp"
#include "omegacond/rng.hpp"
#include "omegacond/solvers.hpp"

namespace omegacond {

/// One generated instance of the ill-conditioned system A(gamma) x = b with
/// A = A0^T A0 of rank <= r < n, A(gamma) = A + eps I + U Diag(gamma) U^T and
/// b = A b1 + U b2 (so b is in the range of [A U]).
struct LowRankProblem {
    SymPDMatrix a;
    double epsilon = 0.0;
    DenseMatrix u;
    Vector b;
    std::uint64_t seed = 0;
    int n = 0;
    int r = 0;
    int t = 0;

    /// The positive definite system matrix A + eps I.
    SymPDMatrix regularized() const { return a.shifted(epsilon); }

    /// Matrix action of A(gamma) without forming it: n^2 + O(n t) per apply.
    LinearOperator make_operator(std::span<const double> gamma) const;
};

LowRankProblem generate_problem(int n, std::uint64_t seed);

enum class Policy { Zero, Ones, InvNorm2, OmegaProj };

const char* policy_name(Policy policy);
std::optional<Policy> parse_policy(const std::string& name);

enum class SolverKind { Lsqr, Cgs };

const char* solver_name(SolverKind solver);
std::optional<SolverKind> parse_solver(const std::string& name);

enum class Measure { Time, Iterations };

const char* measure_name(Measure measure);
std::optional<Measure> parse_measure(const std::string& name);

/// gamma for one of the four benchmark policies; omegaProj runs the
/// closed-form optimum on A + eps I through both whitenings (timing each) and
/// projects onto the box.
struct PolicyGamma {
    GammaResult result;
    double gamma_time_spectral = 0.0; // eig + whiten + formula + projection
    double gamma_time_cholesky = 0.0; // chol + forward solves + formula + projection
};

PolicyGamma policy_gamma(const LowRankProblem& problem, Policy policy);

/// One (problem, policy, solver) cell of the benchmark.
struct PolicyRun {
    int n = 0;
    int r = 0;
    int t = 0;
    int instance = 0;
    Policy policy = Policy::Zero;
    SolverKind solver = SolverKind::Lsqr;
    double kappa_a_gamma = 0.0;
    double omega_a_gamma = 0.0;
    double rel_residual = 0.0;
    long iterations = 0;
    double wall_time = 0.0;
    SolveStatus status = SolveStatus::MaxIter;
    double gamma_time_spectral = 0.0;
    double gamma_time_cholesky = 0.0;
};

struct RunConfig {
    std::vector<int> sizes;
    int instances_per_size = 10;
    std::uint64_t master_seed = 1;
    double tol = 1e-12;
    long max_iterations = 50000;
    std::vector<SolverKind> solvers = {SolverKind::Lsqr, SolverKind::Cgs};
    std::vector<Policy> policies = {Policy::Zero, Policy::Ones, Policy::InvNorm2, Policy::OmegaProj};
    Measure measure = Measure::Iterations;
    int jobs = 1;
};

RunConfig parse_run_config(std::istream& in);

/// Performance-profile input: the measured value for one (problem, policy)
/// pair, with problems identified by an arbitrary dense key.
struct ProfileSample {
    int problem = 0;
    int policy = 0;
    double value = 0.0;
    bool passed = false;
};

/// rho_gamma(tau) sampled on a log2 grid of 256 points spanning [1, 2^10].
struct ProfileTable {
    std::vector<double> tau;
    std::vector<std::string> policy_names;
    std::vector<std::vector<double>> rho; // [policy][tau index]
};

ProfileTable performance_profile(const std::vector<ProfileSample>& samples,
                                 const std::vector<std::string>& policy_names);

struct BenchmarkResult {
    std::vector<PolicyRun> runs;
    ProfileTable profile;
};

/// Full sweep: sizes x instances x policies x solvers, instance-level
/// parallelism via config.jobs. Individual solve failures become failed
/// convergence tests in the profile, never abort the sweep. Rows come back
/// in canonical order (n, instance, policy, solver) independent of jobs.
BenchmarkResult run_benchmark(const RunConfig& config);

/// Build profile samples from benchmark rows for the given measure. Each
/// (size, instance, solver) triple is one profile problem; a run passes its
/// convergence test iff rel_residual <= pass_tol. For the time measure under
/// omegaProj the gamma computation time of the spectral path is added to the
/// solve time.
std::vector<ProfileSample> profile_samples(const std::vector<PolicyRun>& runs, Measure measure,
                                           double pass_tol,
                                           std::vector<std::string>& policy_names_out);

std::string results_csv_header();
std::string results_csv_row(const PolicyRun& run);
std::vector<PolicyRun> read_results_csv(std::istream& in);

void write_profile_csv(std::ostream& out, const ProfileTable& table);

/// Perturbation study of Section "omega in error analysis": solve A x = b
/// directly, then for each trial draw a symmetric dA and a db, solve the
/// perturbed system and record (||dx||/||x||) / (rho_A + rho_b).
struct CondEstimateStudy {
    int n = 0;
    double kappa = 0.0;
    double omega = 0.0;
    double eps = 0.0;
    int trials = 0;
    int redraws = 0; // perturbed matrices that lost definiteness and were redrawn
    Vector ratios;
    double ratio_max = 0.0;
    double ratio_mean = 0.0;
    double ratio_median = 0.0;

    static std::string csv_header();
    std::string csv_row() const;
};

CondEstimateStudy estimate_cond(const SymPDMatrix& a, const Vector& b, int trials, double eps,
                                Rng& rng);

/// Ratio of one explicit perturbation; the building block of estimate_cond,
/// exposed so tests can drive adversarial directions.
double perturbation_ratio(const SymPDMatrix& a, const Vector& b, const DenseMatrix& da,
                          const Vector& db, double eps);

} // namespace omegacond
