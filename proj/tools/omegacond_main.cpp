// omegacond command-line interface: condition measures, optimal low-rank
// preconditioners, problem generation, the solver benchmark and the
// perturbation study. Exit codes: 0 success, 1 domain error, 2 usage error.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "omegacond/cond.hpp"
#include "omegacond/experiments.hpp"
#include "omegacond/matrix_market.hpp"

namespace {

using namespace omegacond;

std::optional<std::uint64_t> env_seed_override() {
    const char* env = std::getenv("OMEGACOND_SEED");
    if (!env || !*env) return std::nullopt;
    try {
        return std::stoull(env);
    } catch (const std::exception&) {
        throw Error(ErrorCode::ParseError, "OMEGACOND_SEED is not an unsigned integer");
    }
}

Vector column_vector(const DenseMatrix& m, const std::string& what) {
    if (m.cols() != 1)
        throw Error(ErrorCode::ParseError, what + " must be a single-column matrix");
    Vector v(static_cast<std::size_t>(m.rows()));
    for (int i = 0; i < m.rows(); ++i) v[static_cast<std::size_t>(i)] = m(i, 0);
    return v;
}

int cmd_eval(const std::string& matrix_path, const std::string& method) {
    const SymPDMatrix a{read_matrix_market_file(matrix_path)};
    CondReport report;
    report.n = a.order();
    const double nan = std::nan("");
    report.kappa = report.omega_eig = report.omega_chol = report.omega_lu = nan;
    report.t_eig = report.t_chol = report.t_lu = nan;
    if (method == "all") {
        report = cond_report(a);
    } else {
        const auto start = std::chrono::steady_clock::now();
        if (method == "eig") {
            const SpectralDecomp eig = symmetric_eig(a);
            report.omega_eig = omega_eig(eig, a.trace());
            report.t_eig = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            report.kappa = kappa(eig);
        } else if (method == "chol") {
            report.omega_chol = omega_chol(a);
            report.t_chol = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        } else {
            report.omega_lu = omega_lu(a);
            report.t_lu = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        }
    }
    std::cout << CondReport::csv_header() << '\n' << report.csv_row() << '\n';
    return 0;
}

int cmd_precond(const std::string& a_path, const std::string& u_path, bool box,
                const std::string& whitening) {
    const UpdateSpec spec{SymPDMatrix(read_matrix_market_file(a_path)),
                          read_matrix_market_file(u_path)};
    const WhiteningSource source =
        whitening == "cholesky" ? WhiteningSource::Cholesky : WhiteningSource::Spectral;
    const Whitening wh = whiten(spec, source);

    GammaResult result;
    if (spec.rank() == 1) {
        result = box ? gamma_rank_one_box(spec, wh) : gamma_rank_one(spec, wh);
    } else if (box) {
        result.gamma = project_box(gamma_rank_t_vector(spec, wh));
        result.policy = "omegaProj";
        result.whitening = source;
        for (double g : result.gamma) result.clamped |= g == 0.0 || g == 1.0;
        result.kkt_residual = kkt_check_box(spec, wh, result.gamma);
        result.omega_value = omega_of_update(spec, result.gamma);
    } else {
        result = gamma_rank_t(spec, wh);
    }
    std::cout << to_json(result) << '\n';
    return 0;
}

int cmd_gen(int n, std::uint64_t seed, const std::string& out_dir) {
    const LowRankProblem problem = generate_problem(n, seed);
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    write_matrix_market_file((dir / "A.mtx").string(), problem.a.matrix());
    write_matrix_market_file((dir / "U.mtx").string(), problem.u);
    DenseMatrix b(problem.n, 1);
    for (int i = 0; i < problem.n; ++i) b(i, 0) = problem.b[static_cast<std::size_t>(i)];
    write_matrix_market_file((dir / "b.mtx").string(), b);

    nlohmann::ordered_json meta;
    meta["n"] = problem.n;
    meta["r"] = problem.r;
    meta["t"] = problem.t;
    meta["epsilon"] = problem.epsilon;
    meta["seed"] = problem.seed;
    std::ofstream meta_out(dir / "meta.json");
    if (!meta_out) throw Error(ErrorCode::IoError, "cannot write meta.json");
    meta_out << meta.dump(2) << '\n';
    return 0;
}

int cmd_run(const std::string& config_path, const std::string& out_dir, int jobs_flag) {
    std::ifstream config_in(config_path);
    if (!config_in) throw Error(ErrorCode::IoError, "cannot open " + config_path);
    RunConfig config = parse_run_config(config_in);
    if (const auto seed = env_seed_override()) config.master_seed = *seed;
    if (jobs_flag > 0) config.jobs = jobs_flag;

    const BenchmarkResult result = run_benchmark(config);

    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    std::ofstream results_out(dir / "results.csv");
    if (!results_out) throw Error(ErrorCode::IoError, "cannot write results.csv");
    results_out << results_csv_header() << '\n';
    for (const PolicyRun& run : result.runs) results_out << results_csv_row(run) << '\n';

    if (!result.profile.policy_names.empty()) {
        const std::string profile_name = std::string("profile_") + measure_name(config.measure) + ".csv";
        std::ofstream profile_out(dir / profile_name);
        if (!profile_out) throw Error(ErrorCode::IoError, "cannot write " + profile_name);
        write_profile_csv(profile_out, result.profile);
    }
    return 0;
}

int cmd_profile(const std::string& results_path, const std::string& measure_token, double tol,
                const std::string& solver_filter, const std::string& out_dir) {
    const auto measure = parse_measure(measure_token);
    if (!measure) throw Error(ErrorCode::ParseError, "unknown measure " + measure_token);
    std::ifstream in(results_path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + results_path);
    std::vector<PolicyRun> runs = read_results_csv(in);
    if (!solver_filter.empty()) {
        const auto solver = parse_solver(solver_filter);
        if (!solver) throw Error(ErrorCode::ParseError, "unknown solver " + solver_filter);
        std::erase_if(runs, [&](const PolicyRun& run) { return run.solver != *solver; });
    }
    std::vector<std::string> names;
    const ProfileTable table = performance_profile(profile_samples(runs, *measure, tol, names), names);
    if (out_dir.empty()) {
        write_profile_csv(std::cout, table);
    } else {
        std::filesystem::create_directories(out_dir);
        const std::string name = std::string("profile_") + measure_name(*measure) + ".csv";
        std::ofstream out(std::filesystem::path(out_dir) / name);
        if (!out) throw Error(ErrorCode::IoError, "cannot write " + name);
        write_profile_csv(out, table);
    }
    return 0;
}

int cmd_condest(const std::string& matrix_path, int trials, double eps, std::uint64_t seed,
                const std::string& rhs_path, const std::string& out_path) {
    const SymPDMatrix a{read_matrix_market_file(matrix_path)};
    if (const auto env = env_seed_override()) seed = *env;
    Rng rng(seed);
    Vector b;
    if (rhs_path.empty()) {
        b.resize(static_cast<std::size_t>(a.order()));
        for (double& v : b) v = rng.normal();
    } else {
        b = column_vector(read_matrix_market_file(rhs_path), "rhs");
    }
    const CondEstimateStudy study = estimate_cond(a, b, trials, eps, rng);
    if (out_path.empty()) {
        std::cout << CondEstimateStudy::csv_header() << '\n' << study.csv_row() << '\n';
    } else {
        std::ofstream out(out_path);
        if (!out) throw Error(ErrorCode::IoError, "cannot write " + out_path);
        out << CondEstimateStudy::csv_header() << '\n' << study.csv_row() << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"omega-condition-number toolkit"};
    app.require_subcommand(1);

    auto* eval = app.add_subcommand("eval", "condition measures of a matrix");
    std::string eval_matrix, eval_method = "all";
    eval->add_option("--matrix", eval_matrix, "Matrix Market file")->required();
    eval->add_option("--method", eval_method, "eig|chol|lu|all")
        ->check(CLI::IsMember({"eig", "chol", "lu", "all"}));

    auto* precond = app.add_subcommand("precond", "optimal omega preconditioner for A + U Diag(gamma) U^T");
    std::string precond_a, precond_u, precond_whitening = "spectral";
    bool precond_box = false;
    precond->add_option("--A", precond_a, "Matrix Market file with the PD matrix")->required();
    precond->add_option("--U", precond_u, "Matrix Market file with the update columns")->required();
    precond->add_flag("--box", precond_box, "constrain gamma to [0,1]^t");
    precond->add_option("--whitening", precond_whitening, "spectral|cholesky")
        ->check(CLI::IsMember({"spectral", "cholesky"}));

    auto* gen = app.add_subcommand("gen", "generate one random low-rank problem");
    int gen_n = 0;
    std::uint64_t gen_seed = 0;
    std::string gen_out;
    gen->add_option("--n", gen_n, "problem size")->required();
    gen->add_option("--seed", gen_seed, "instance seed")->required();
    gen->add_option("--out", gen_out, "output directory")->required();

    auto* run = app.add_subcommand("run", "run the preconditioner benchmark");
    std::string run_config, run_out;
    int run_jobs = 0;
    run->add_option("--config", run_config, "JSON run configuration")->required();
    run->add_option("--out", run_out, "output directory")->required();
    run->add_option("--jobs", run_jobs, "instance-level parallel workers");

    auto* profile = app.add_subcommand("profile", "performance profiles from a results.csv");
    std::string profile_results, profile_measure, profile_solver, profile_out;
    double profile_tol = 1e-12;
    profile->add_option("--results", profile_results, "results.csv from run")->required();
    profile->add_option("--measure", profile_measure, "time|iters")->required();
    profile->add_option("--tol", profile_tol, "convergence-test tolerance");
    profile->add_option("--solver", profile_solver, "restrict to one solver");
    profile->add_option("--out", profile_out, "output directory (default: stdout)");

    auto* condest = app.add_subcommand("condest", "perturbation-based condition estimate");
    std::string condest_matrix, condest_rhs, condest_out;
    int condest_trials = 30;
    double condest_eps = 1e-8;
    std::uint64_t condest_seed = 1;
    condest->add_option("--matrix", condest_matrix, "Matrix Market file")->required();
    condest->add_option("--trials", condest_trials, "number of random perturbations");
    condest->add_option("--eps", condest_eps, "perturbation scale");
    condest->add_option("--seed", condest_seed, "rng seed (OMEGACOND_SEED overrides)");
    condest->add_option("--rhs", condest_rhs, "Matrix Market column vector for b");
    condest->add_option("--out", condest_out, "output csv path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(eval)) return cmd_eval(eval_matrix, eval_method);
        if (app.got_subcommand(precond))
            return cmd_precond(precond_a, precond_u, precond_box, precond_whitening);
        if (app.got_subcommand(gen)) return cmd_gen(gen_n, gen_seed, gen_out);
        if (app.got_subcommand(run)) return cmd_run(run_config, run_out, run_jobs);
        if (app.got_subcommand(profile))
            return cmd_profile(profile_results, profile_measure, profile_tol, profile_solver, profile_out);
        if (app.got_subcommand(condest))
            return cmd_condest(condest_matrix, condest_trials, condest_eps, condest_seed, condest_rhs,
                               condest_out);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
