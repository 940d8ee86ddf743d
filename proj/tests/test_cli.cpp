// End-to-end checks of the command-line binary. The path to the executable
// comes from the OMEGACOND_BIN environment variable (set by ctest).

#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "omegacond/cond.hpp"
#include "omegacond/experiments.hpp"
#include "omegacond/matrix_market.hpp"
#include "support.hpp"

namespace {

namespace fs = std::filesystem;
using namespace omegacond;

struct CommandResult {
    int exit_code = -1;
    std::string output; // stdout only
};

std::string binary_path() {
    const char* env = std::getenv("OMEGACOND_BIN");
    REQUIRE_MESSAGE(env != nullptr, "OMEGACOND_BIN must point at the CLI binary");
    return env;
}

CommandResult run_command(const std::string& args) {
    const std::string command = binary_path() + " " + args + " 2>/dev/null";
    FILE* pipe = popen(command.c_str(), "r");
    REQUIRE(pipe != nullptr);
    CommandResult result;
    std::array<char, 4096> chunk{};
    std::size_t got = 0;
    while ((got = fread(chunk.data(), 1, chunk.size(), pipe)) > 0)
        result.output.append(chunk.data(), got);
    const int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::path("cli_scratch") / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

} // namespace

TEST_CASE("eval prints the condition report") {
    const fs::path dir = fresh_dir("eval");
    write_matrix_market_file((dir / "eye.mtx").string(), DenseMatrix::identity(3));
    const CommandResult eye = run_command("eval --matrix " + (dir / "eye.mtx").string());
    CHECK(eye.exit_code == 0);
    CHECK(eye.output.find("n,kappa,omega_eig,omega_R,omega_LU,t_eig,t_R,t_LU") == 0);
    CHECK(eye.output.find("\n3,1.0") != std::string::npos);

    write_matrix_market_file((dir / "diag.mtx").string(),
                             DenseMatrix::diagonal(std::vector<double>{1.0, 4.0}));
    const CommandResult diag = run_command("eval --matrix " + (dir / "diag.mtx").string());
    CHECK(diag.exit_code == 0);
    CHECK(diag.output.find("\n2,4.0") != std::string::npos);
    CHECK(diag.output.find("1.25") != std::string::npos);

    const CommandResult lu_only =
        run_command("eval --matrix " + (dir / "diag.mtx").string() + " --method lu");
    CHECK(lu_only.exit_code == 0);
    CHECK(lu_only.output.find("1.25") != std::string::npos);
}

TEST_CASE("eval fails with exit 1 on a non-PD matrix and exit 2 on usage errors") {
    const fs::path dir = fresh_dir("eval_err");
    DenseMatrix indefinite(2, 2, Vector{1.0, 2.0, 2.0, 1.0});
    write_matrix_market_file((dir / "bad.mtx").string(), indefinite);
    CHECK(run_command("eval --matrix " + (dir / "bad.mtx").string()).exit_code == 1);
    CHECK(run_command("eval --matrix " + (dir / "missing.mtx").string()).exit_code == 1);
    CHECK(run_command("eval --matrix x --bogus-flag").exit_code == 2);
    CHECK(run_command("nonsense").exit_code == 2);
}

TEST_CASE("eval of a written matrix matches the in-memory report digit for digit") {
    Rng rng(211);
    DenseMatrix g = testing::random_dense(6, 6, rng);
    const SymPDMatrix a = SymPDMatrix([&] {
        DenseMatrix spd = serial::gram(g);
        for (int i = 0; i < 6; ++i) spd(i, i) += 6.0;
        return spd;
    }());
    const fs::path dir = fresh_dir("eval_roundtrip");
    write_matrix_market_file((dir / "a.mtx").string(), a.matrix());
    const CommandResult reported = run_command("eval --matrix " + (dir / "a.mtx").string());
    CHECK(reported.exit_code == 0);

    // compare the value columns (timings legitimately differ run to run)
    std::istringstream lines(reported.output);
    std::string header, row;
    std::getline(lines, header);
    std::getline(lines, row);
    std::istringstream cells(row);
    std::string cell;
    std::vector<std::string> fields;
    while (std::getline(cells, cell, ',')) fields.push_back(cell);
    REQUIRE(fields.size() == 8);

    char expected[64];
    std::snprintf(expected, sizeof(expected), "%.17e", kappa(a));
    CHECK(fields[1] == expected);
    std::snprintf(expected, sizeof(expected), "%.17e", omega_eig(a));
    CHECK(fields[2] == expected);
    std::snprintf(expected, sizeof(expected), "%.17e", omega_chol(a));
    CHECK(fields[3] == expected);
    std::snprintf(expected, sizeof(expected), "%.17e", omega_lu(a));
    CHECK(fields[4] == expected);
}

TEST_CASE("precond reproduces the worked example and clamps with --box") {
    const fs::path dir = fresh_dir("precond");
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    write_matrix_market_file((dir / "A.mtx").string(),
                             DenseMatrix::diagonal(std::vector<double>{1.0, 2.0, 2.0}));
    DenseMatrix u(3, 2);
    u(0, 0) = inv_sqrt2;
    u(1, 0) = -inv_sqrt2;
    u(2, 1) = 1.0;
    write_matrix_market_file((dir / "U.mtx").string(), u);

    const std::string base = "precond --A " + (dir / "A.mtx").string() + " --U " + (dir / "U.mtx").string();
    const CommandResult plain = run_command(base);
    CHECK(plain.exit_code == 0);
    {
        const auto json = nlohmann::json::parse(plain.output);
        REQUIRE(json["gamma"].size() == 2);
        CHECK(json["gamma"][0].get<double>() == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
        CHECK(json["gamma"][1].get<double>() == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
        CHECK(json["policy"] == "omegaOpt");
    }

    const CommandResult boxed = run_command(base + " --box");
    CHECK(boxed.exit_code == 0);
    {
        const auto json = nlohmann::json::parse(boxed.output);
        CHECK(json["gamma"][0].get<double>() == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
        CHECK(json["gamma"][1].get<double>() == 0.0);
        CHECK(json["clamped"].get<bool>());
        CHECK(json["policy"] == "omegaProj");
    }

    // identity A: gamma is all zeros (up to roundoff of the closed form)
    write_matrix_market_file((dir / "I.mtx").string(), DenseMatrix::identity(3));
    const CommandResult id = run_command("precond --A " + (dir / "I.mtx").string() + " --U " +
                                         (dir / "U.mtx").string() + " --whitening cholesky");
    CHECK(id.exit_code == 0);
    for (const auto& value : nlohmann::json::parse(id.output)["gamma"])
        CHECK(std::abs(value.get<double>()) <= 1e-12);

    // rank one: diag(1,4) with u = e1 gives gamma 3, clamped to 1 with --box
    write_matrix_market_file((dir / "A14.mtx").string(),
                             DenseMatrix::diagonal(std::vector<double>{1.0, 4.0}));
    DenseMatrix e1(2, 1);
    e1(0, 0) = 1.0;
    write_matrix_market_file((dir / "e1.mtx").string(), e1);
    const std::string rank_one = "precond --A " + (dir / "A14.mtx").string() + " --U " + (dir / "e1.mtx").string();
    const CommandResult unboxed = run_command(rank_one);
    CHECK(unboxed.output.find("\"gamma\":[3") != std::string::npos);
    const CommandResult clamped = run_command(rank_one + " --box");
    CHECK(clamped.output.find("\"gamma\":[1") != std::string::npos);
}

TEST_CASE("gen writes byte-identical outputs for the same seed") {
    const fs::path first = fresh_dir("gen_a");
    const fs::path second = fresh_dir("gen_b");
    CHECK(run_command("gen --n 100 --seed 7 --out " + first.string()).exit_code == 0);
    CHECK(run_command("gen --n 100 --seed 7 --out " + second.string()).exit_code == 0);
    for (const char* name : {"A.mtx", "U.mtx", "b.mtx", "meta.json"}) {
        CAPTURE(name);
        CHECK(slurp(first / name) == slurp(second / name));
    }
    const fs::path different = fresh_dir("gen_c");
    CHECK(run_command("gen --n 100 --seed 8 --out " + different.string()).exit_code == 0);
    CHECK(slurp(first / "A.mtx") != slurp(different / "A.mtx"));
}

TEST_CASE("run produces results and profile files with the expected shape") {
    const fs::path dir = fresh_dir("run");
    {
        std::ofstream config(dir / "config.json");
        config << R"({"sizes":[12,16],"instancesPerSize":2,"masterSeed":5,
                      "maxIter":2000,"solvers":["lsqr","cgs"],
                      "policies":["zero","ones","invnorm2","omegaProj"],
                      "measure":"iters"})";
    }
    const CommandResult run =
        run_command("run --config " + (dir / "config.json").string() + " --out " + dir.string() +
                    " --jobs 2");
    CHECK(run.exit_code == 0);

    const std::string results = slurp(dir / "results.csv");
    CHECK(results.rfind("n,r,t,policy,solver,", 0) == 0);
    // 2 sizes x 2 instances x 4 policies x 2 solvers data rows
    CHECK(std::count(results.begin(), results.end(), '\n') == 1 + 2 * 2 * 4 * 2);

    const std::string profile = slurp(dir / "profile_iters.csv");
    CHECK(profile.rfind("tau,zero,ones,invnorm2,omegaProj", 0) == 0);
    CHECK(std::count(profile.begin(), profile.end(), '\n') == 1 + 256);
}

TEST_CASE("profile recovers the hand-computed curves from a handmade results file") {
    const fs::path dir = fresh_dir("profile");
    {
        std::ofstream results(dir / "results.csv");
        results << results_csv_header() << '\n';
        // two problems, two policies, iterations {(100,200),(300,300)}
        results << "16,9,2,ones,cgs,1.0,1.0,1e-13,100,0.0,0.0,0.0\n";
        results << "16,9,2,invnorm2,cgs,1.0,1.0,1e-13,200,0.0,0.0,0.0\n";
        results << "16,9,2,ones,cgs,1.0,1.0,1e-13,300,0.0,0.0,0.0\n";
        results << "16,9,2,invnorm2,cgs,1.0,1.0,1e-13,300,0.0,0.0,0.0\n";
    }
    const CommandResult profiled =
        run_command("profile --results " + (dir / "results.csv").string() + " --measure iters");
    CHECK(profiled.exit_code == 0);

    std::istringstream lines(profiled.output);
    std::string header;
    std::getline(lines, header);
    CHECK(header == "tau,ones,invnorm2");
    std::string first_row;
    std::getline(lines, first_row);
    // at tau = 1: ones best on both problems, invnorm2 on one of two
    CHECK(first_row.find("1.00000000000000000e+00,1.00000000000000000e+00,5.00000000000000000e-01") !=
          std::string::npos);
    std::string row;
    std::string last_row;
    while (std::getline(lines, row))
        if (!row.empty()) last_row = row;
    CHECK(last_row.find(",1.00000000000000000e+00,1.00000000000000000e+00") != std::string::npos);
}

TEST_CASE("condest reports the study row") {
    const fs::path dir = fresh_dir("condest");
    write_matrix_market_file((dir / "a.mtx").string(),
                             DenseMatrix::diagonal(std::vector<double>{1.0, 2.0, 8.0}));
    const CommandResult study =
        run_command("condest --matrix " + (dir / "a.mtx").string() + " --trials 10 --seed 3");
    CHECK(study.exit_code == 0);
    CHECK(study.output.find("n,kappa,omega,eps,trials,redraws,ratioMax,ratioMean,ratioMedian") == 0);
    CHECK(study.output.find("\n3,8.0") != std::string::npos);
}
