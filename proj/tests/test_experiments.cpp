#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "omegacond/cond.hpp"
#include "omegacond/experiments.hpp"
#include "support.hpp"

using namespace omegacond;
using testing::random_spd;
using testing::random_vector;

TEST_CASE("problem generation honors the documented ranges") {
    for (int n : {8, 40, 100}) {
        const LowRankProblem problem = generate_problem(n, 99);
        CHECK(problem.n == n);
        CHECK(problem.r >= n / 2 + 1);
        CHECK(problem.r <= n - 1);
        CHECK(problem.t >= 2);
        CHECK(problem.t <= std::max(2, problem.r / 2));
        CHECK(problem.epsilon >= 1e-9);
        CHECK(problem.epsilon <= 1e-7);
        for (int j = 0; j < problem.t; ++j) {
            double norm_sq = 0.0;
            for (int i = 0; i < n; ++i) norm_sq += problem.u(i, j) * problem.u(i, j);
            CHECK(norm_sq > 0.0);
        }
        CHECK_NOTHROW(cholesky(problem.regularized()));
    }
    CHECK_THROWS_AS(generate_problem(4, 1), Error);
}

TEST_CASE("generated matrices are numerically rank deficient") {
    const LowRankProblem problem = generate_problem(40, 7);
    const SpectralDecomp eig = symmetric_eig(problem.a);
    const double cutoff = 1e-8 * problem.a.max_abs();
    for (int i = problem.r; i < problem.n; ++i)
        CHECK(eig.d[static_cast<std::size_t>(i)] <= cutoff);
}

TEST_CASE("identical seeds give bit-identical problems, different seeds differ") {
    const LowRankProblem first = generate_problem(24, 1234);
    const LowRankProblem second = generate_problem(24, 1234);
    CHECK(first.r == second.r);
    CHECK(first.t == second.t);
    CHECK(first.epsilon == second.epsilon);
    CHECK(max_abs_diff({first.a.matrix().data(), 24 * 24}, {second.a.matrix().data(), 24 * 24}) == 0.0);
    CHECK(max_abs_diff(first.b, second.b) == 0.0);

    const LowRankProblem other = generate_problem(24, 4321);
    double distance = 0.0;
    for (int i = 0; i < 24 * 24; ++i) {
        const double d = first.a.matrix().data()[i] - other.a.matrix().data()[i];
        distance += d * d;
    }
    CHECK(distance > 0.0);
}

TEST_CASE("operator application matches the dense update") {
    const LowRankProblem problem = generate_problem(16, 5);
    Vector gamma(static_cast<std::size_t>(problem.t));
    Rng rng(3);
    for (double& g : gamma) g = rng.uniform(0.0, 1.0);

    const SymPDMatrix dense = UpdateSpec(problem.regularized(), problem.u).updated(gamma);
    const LinearOperator op = problem.make_operator(gamma);
    const Vector x = random_vector(16, rng);
    Vector via_op(16, 0.0), via_dense(16, 0.0);
    op.apply(x, via_op);
    serial::matvec(dense.matrix(), x, via_dense);
    CHECK(max_abs_diff(via_op, via_dense) <= 1e-12 * dense.max_abs() * norm2(x));
}

TEST_CASE("policy gamma values") {
    const LowRankProblem problem = generate_problem(20, 11);

    const PolicyGamma zero = policy_gamma(problem, Policy::Zero);
    for (double g : zero.result.gamma) CHECK(g == 0.0);

    const PolicyGamma ones = policy_gamma(problem, Policy::Ones);
    for (double g : ones.result.gamma) CHECK(g == 1.0);

    const PolicyGamma inv = policy_gamma(problem, Policy::InvNorm2);
    for (int j = 0; j < problem.t; ++j) {
        double norm_sq = 0.0;
        for (int i = 0; i < problem.n; ++i) norm_sq += problem.u(i, j) * problem.u(i, j);
        CHECK(inv.result.gamma[static_cast<std::size_t>(j)] ==
              doctest::Approx(std::min(1.0, 1.0 / norm_sq)).epsilon(1e-14));
        CHECK(inv.result.gamma[static_cast<std::size_t>(j)] <= 1.0);
    }

    const PolicyGamma proj = policy_gamma(problem, Policy::OmegaProj);
    for (double g : proj.result.gamma) {
        CHECK(g >= 0.0);
        CHECK(g <= 1.0);
    }
    CHECK(proj.gamma_time_spectral > 0.0);
    CHECK(proj.gamma_time_cholesky > 0.0);
    CHECK(proj.result.omega_value >= 1.0 - 1e-10);
}

TEST_CASE("omegaProj policy on the projection-failure data with zero regularization") {
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    DenseMatrix u(3, 2);
    u(0, 0) = inv_sqrt2;
    u(1, 0) = -inv_sqrt2;
    u(2, 1) = 1.0;
    LowRankProblem problem{SymPDMatrix(DenseMatrix::diagonal(std::vector<double>{1.0, 2.0, 2.0})),
                           0.0,
                           u,
                           Vector{1.0, 1.0, 1.0},
                           0,
                           3,
                           3,
                           2};
    const PolicyGamma proj = policy_gamma(problem, Policy::OmegaProj);
    CHECK(proj.result.gamma[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(proj.result.gamma[1] == 0.0);
    CHECK(proj.result.clamped);
}

TEST_CASE("omegaProj beats the heuristic policies where the optimum is interior") {
    // Where gamma* already lies in [0,1]^t the projection is the true box
    // optimum and must dominate; on clamped instances the comparison is
    // recorded, not asserted.
    int unclamped = 0, clamped_better = 0, clamped_total = 0;
    for (int instance = 0; instance < 10; ++instance) {
        const LowRankProblem problem = generate_problem(24, 9000 + instance);
        const UpdateSpec spec(problem.regularized(), problem.u);
        const PolicyGamma proj = policy_gamma(problem, Policy::OmegaProj);
        const double omega_proj = proj.result.omega_value;
        const double omega_ones = policy_gamma(problem, Policy::Ones).result.omega_value;
        const double omega_inv = policy_gamma(problem, Policy::InvNorm2).result.omega_value;
        if (!proj.result.clamped) {
            ++unclamped;
            CHECK(omega_proj <= omega_ones + 1e-9);
            CHECK(omega_proj <= omega_inv + 1e-9);
        } else {
            ++clamped_total;
            clamped_better += omega_proj <= std::min(omega_ones, omega_inv) + 1e-9;
        }
    }
    MESSAGE("unclamped instances: ", unclamped, "; clamped where omegaProj still best: ",
            clamped_better, "/", clamped_total);
}

TEST_CASE("performance profile forced by its definition") {
    // problems x policies with times {(2,4),(3,3)}
    const std::vector<ProfileSample> samples{
        {0, 0, 2.0, true}, {0, 1, 4.0, true}, {1, 0, 3.0, true}, {1, 1, 3.0, true}};
    const ProfileTable table = performance_profile(samples, {"a", "b"});
    CHECK(table.tau.front() == 1.0);
    CHECK(table.tau.back() == doctest::Approx(1024.0));
    // policy a is best on both problems
    CHECK(table.rho[0].front() == 1.0);
    // policy b: best on problem 1 only at tau < 2, both from tau >= 2
    CHECK(table.rho[1].front() == 0.5);
    const auto tau_two = std::lower_bound(table.tau.begin(), table.tau.end(), 2.0) - table.tau.begin();
    CHECK(table.rho[1][static_cast<std::size_t>(tau_two)] == 1.0);
    for (const auto& curve : table.rho) {
        for (std::size_t k = 1; k < curve.size(); ++k) CHECK(curve[k] >= curve[k - 1]);
        for (double v : curve) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("profile of a policy failing every problem stays at zero") {
    const std::vector<ProfileSample> samples{
        {0, 0, 2.0, true}, {0, 1, 1.0, false}, {1, 0, 3.0, true}, {1, 1, 1.0, false}};
    const ProfileTable table = performance_profile(samples, {"pass", "fail"});
    for (double v : table.rho[1]) CHECK(v == 0.0);
    CHECK(table.rho[0].front() == 1.0); // sole passer is best everywhere
}

TEST_CASE("profile input validation") {
    CHECK_THROWS_AS(performance_profile({}, {"a", "b"}), Error);
    CHECK_THROWS_AS(performance_profile({{0, 0, 1.0, true}}, {"only"}), Error);
}

TEST_CASE("results csv round-trips and attributes instances") {
    PolicyRun row;
    row.n = 16;
    row.r = 9;
    row.t = 2;
    row.instance = 0;
    row.policy = Policy::OmegaProj;
    row.solver = SolverKind::Cgs;
    row.kappa_a_gamma = 1.25e10;
    row.omega_a_gamma = 321.5;
    row.rel_residual = 7.5e-13;
    row.iterations = 42;
    row.wall_time = 0.125;
    row.gamma_time_spectral = 0.5;
    row.gamma_time_cholesky = 0.0625;

    std::stringstream csv;
    csv << results_csv_header() << '\n';
    csv << results_csv_row(row) << '\n';
    PolicyRun second = row; // same (n, policy, solver): next instance
    second.iterations = 50;
    csv << results_csv_row(second) << '\n';

    const std::vector<PolicyRun> back = read_results_csv(csv);
    REQUIRE(back.size() == 2);
    CHECK(back[0].n == 16);
    CHECK(back[0].policy == Policy::OmegaProj);
    CHECK(back[0].solver == SolverKind::Cgs);
    CHECK(back[0].kappa_a_gamma == 1.25e10);
    CHECK(back[0].rel_residual == 7.5e-13);
    CHECK(back[0].iterations == 42);
    CHECK(back[0].instance == 0);
    CHECK(back[1].instance == 1);

    std::stringstream headerless("1,2,3\n");
    CHECK_THROWS_AS(read_results_csv(headerless), Error);
}

TEST_CASE("time measure bills the spectral gamma computation to omegaProj") {
    PolicyRun fast;
    fast.n = 16;
    fast.policy = Policy::OmegaProj;
    fast.solver = SolverKind::Lsqr;
    fast.rel_residual = 1e-13;
    fast.wall_time = 1.0;
    fast.gamma_time_spectral = 0.75;
    fast.gamma_time_cholesky = 2.0; // must not be billed
    PolicyRun other = fast;
    other.policy = Policy::Ones;
    other.wall_time = 1.5;
    other.gamma_time_spectral = 0.0;

    std::vector<std::string> names;
    const auto samples = profile_samples({fast, other}, Measure::Time, 1e-12, names);
    REQUIRE(names.size() == 2);
    CHECK(samples[0].value == doctest::Approx(1.75));
    CHECK(samples[1].value == doctest::Approx(1.5));

    names.clear();
    const auto iteration_samples = profile_samples({fast, other}, Measure::Iterations, 1e-12, names);
    CHECK(iteration_samples[0].value == 0.0);
}

TEST_CASE("run config parsing with defaults and validation") {
    std::istringstream good(R"({"sizes":[16,24],"instancesPerSize":2,"masterSeed":9,
        "tol":1e-10,"maxIter":700,"solvers":["cgs"],"policies":["zero","omegaProj"],
        "measure":"time","jobs":2})");
    const RunConfig config = parse_run_config(good);
    CHECK(config.sizes == std::vector<int>{16, 24});
    CHECK(config.instances_per_size == 2);
    CHECK(config.master_seed == 9);
    CHECK(config.tol == 1e-10);
    CHECK(config.max_iterations == 700);
    CHECK(config.solvers == std::vector<SolverKind>{SolverKind::Cgs});
    CHECK(config.policies == std::vector<Policy>{Policy::Zero, Policy::OmegaProj});
    CHECK(config.measure == Measure::Time);
    CHECK(config.jobs == 2);

    std::istringstream minimal(R"({"sizes":[10]})");
    const RunConfig defaults = parse_run_config(minimal);
    CHECK(defaults.tol == 1e-12);
    CHECK(defaults.max_iterations == 50000);
    CHECK(defaults.solvers.size() == 2);
    CHECK(defaults.policies.size() == 4);
    CHECK(defaults.measure == Measure::Iterations);

    std::istringstream bad_solver(R"({"sizes":[10],"solvers":["gmres"]})");
    CHECK_THROWS_AS(parse_run_config(bad_solver), Error);
    std::istringstream no_sizes(R"({"sizes":[]})");
    CHECK_THROWS_AS(parse_run_config(no_sizes), Error);
    std::istringstream not_json("sizes: [10]");
    CHECK_THROWS_AS(parse_run_config(not_json), Error);
}

TEST_CASE("toy benchmark sweep is deterministic and canonically ordered") {
    RunConfig config;
    config.sizes = {12, 16};
    config.instances_per_size = 2;
    config.master_seed = 77;
    config.max_iterations = 2000;
    config.jobs = 1;

    const BenchmarkResult first = run_benchmark(config);
    CHECK(first.runs.size() == 2u * 2u * 4u * 2u);

    // canonical order: n, instance, policy, solver
    std::size_t index = 0;
    for (int n : config.sizes)
        for (int instance = 0; instance < 2; ++instance)
            for (Policy policy : config.policies)
                for (SolverKind solver : config.solvers) {
                    CHECK(first.runs[index].n == n);
                    CHECK(first.runs[index].instance == instance);
                    CHECK(first.runs[index].policy == policy);
                    CHECK(first.runs[index].solver == solver);
                    ++index;
                }

    config.jobs = 2; // thread count must not change any numerical output
    const BenchmarkResult second = run_benchmark(config);
    REQUIRE(second.runs.size() == first.runs.size());
    for (std::size_t i = 0; i < first.runs.size(); ++i) {
        CHECK(first.runs[i].r == second.runs[i].r);
        CHECK(first.runs[i].t == second.runs[i].t);
        CHECK(first.runs[i].kappa_a_gamma == second.runs[i].kappa_a_gamma);
        CHECK(first.runs[i].omega_a_gamma == second.runs[i].omega_a_gamma);
        CHECK(first.runs[i].rel_residual == second.runs[i].rel_residual);
        CHECK(first.runs[i].iterations == second.runs[i].iterations);
    }
    CHECK(first.profile.policy_names.size() == 4);
}

TEST_CASE("perturbation ratio is exactly one for rhs-only perturbations of the identity") {
    // x = b and dx = eps db exactly, so the ratio is 1 for any eps; eps is
    // kept large enough that rounding b + eps db does not eat the margin
    Rng rng(157);
    const SymPDMatrix eye(DenseMatrix::identity(12));
    const Vector b = random_vector(12, rng);
    const DenseMatrix no_da(12, 12);
    for (int trial = 0; trial < 5; ++trial) {
        const Vector db = random_vector(12, rng);
        CHECK(perturbation_ratio(eye, b, no_da, db, 1e-3) == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("adversarial perturbation of a stiff diagonal system reaches kappa") {
    const SymPDMatrix a(DenseMatrix::diagonal(std::vector<double>{1.0, 1e4}));
    const Vector b{0.0, 1.0};  // along the stiff direction, so x is tiny
    const Vector db{1.0, 0.0}; // the soft direction is amplified by 1/lambda_min
    const DenseMatrix no_da(2, 2);
    const double ratio = perturbation_ratio(a, b, no_da, db, 1e-8);
    CHECK(ratio >= 0.5e4);
    CHECK(ratio <= 2.0e4);
}

TEST_CASE("random perturbation study respects the first-order kappa bound") {
    Rng rng(163);
    const SymPDMatrix a = random_spd(30, rng);
    const Vector b = random_vector(30, rng);
    Rng study_rng(7);
    const CondEstimateStudy study = estimate_cond(a, b, 30, 1e-8, study_rng);
    CHECK(study.trials == 30);
    CHECK(study.ratios.size() == 30);
    CHECK(study.ratio_max <= 1.1 * study.kappa);
    CHECK(study.ratio_mean <= study.ratio_max);
    CHECK(study.ratio_median <= study.ratio_max);
    CHECK(study.omega >= 1.0);
    const std::string row = study.csv_row();
    CHECK(row.rfind("30,", 0) == 0);
    CHECK(std::count(row.begin(), row.end(), ',') == 8);
}
