// Compares the OpenMP kernels against the serial reference implementations:
// wall time for both paths plus the max absolute deviation, which must be
// exactly zero (parallel loops split over output elements only).

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "omegacond/kernels.hpp"
#include "omegacond/rng.hpp"

namespace {

using namespace omegacond;
using Clock = std::chrono::steady_clock;

DenseMatrix random_matrix(int rows, int cols, Rng& rng) {
    DenseMatrix a(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) a(i, j) = rng.normal();
    return a;
}

DenseMatrix random_spd(int n, Rng& rng) {
    DenseMatrix g = random_matrix(n, n, rng);
    DenseMatrix a = serial::gram(g);
    for (int i = 0; i < n; ++i) a(i, i) += n; // keep the Cholesky comfortably inside the cone
    return a;
}

template <typename F>
double time_once(F&& f) {
    // min of three runs; this box's second core comes and goes
    double best = 1e300;
    for (int rep = 0; rep < 3; ++rep) {
        const auto start = Clock::now();
        f();
        best = std::min(best, std::chrono::duration<double>(Clock::now() - start).count());
    }
    return best;
}

void report(const char* kernel, int n, double t_serial, double t_parallel, double max_diff) {
    std::printf("%-22s n=%5d  serial %8.4fs  parallel %8.4fs  speedup %5.2fx  maxdiff %g\n",
                kernel, n, t_serial, t_parallel, t_serial / t_parallel, max_diff);
}

} // namespace

int main(int argc, char** argv) {
    const std::vector<int> sizes = argc > 1 ? std::vector<int>{std::atoi(argv[1])}
                                            : std::vector<int>{256, 512, 1024};
#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP disabled; both paths run serially\n");
#endif

    for (int n : sizes) {
        Rng rng(2024);
        const DenseMatrix a = random_matrix(n, n, rng);
        const DenseMatrix b = random_matrix(n, n, rng);
        const DenseMatrix spd = random_spd(n, rng);
        Vector x(static_cast<std::size_t>(n));
        for (double& v : x) v = rng.normal();

        {
            DenseMatrix c_serial, c_parallel;
            const double ts = time_once([&] { c_serial = serial::matmul(a, b); });
            const double tp = time_once([&] { c_parallel = kernels::matmul(a, b); });
            report("matmul", n, ts, tp,
                   max_abs_diff({c_serial.data(), static_cast<std::size_t>(n) * n},
                                {c_parallel.data(), static_cast<std::size_t>(n) * n}));
        }
        {
            DenseMatrix g_serial, g_parallel;
            const double ts = time_once([&] { g_serial = serial::gram(a); });
            const double tp = time_once([&] { g_parallel = kernels::gram(a); });
            report("gram", n, ts, tp,
                   max_abs_diff({g_serial.data(), static_cast<std::size_t>(n) * n},
                                {g_parallel.data(), static_cast<std::size_t>(n) * n}));
        }
        {
            Vector y_serial(static_cast<std::size_t>(n)), y_parallel(static_cast<std::size_t>(n));
            double ts = 0.0, tp = 0.0;
            for (int rep = 0; rep < 50; ++rep) {
                ts += time_once([&] { serial::matvec(a, x, y_serial); });
                tp += time_once([&] { kernels::matvec(a, x, y_parallel); });
            }
            report("matvec (x50)", n, ts, tp, max_abs_diff(y_serial, y_parallel));
        }
        {
            std::vector<double> c_serial(spd.data(), spd.data() + static_cast<std::size_t>(n) * n);
            std::vector<double> c_parallel = c_serial;
            const double ts = time_once([&] { serial::cholesky_inplace(c_serial, n, nullptr); });
            const double tp = time_once([&] { kernels::cholesky_inplace(c_parallel, n, nullptr); });
            report("cholesky", n, ts, tp, max_abs_diff(c_serial, c_parallel));
        }
        {
            std::vector<double> l_serial(a.data(), a.data() + static_cast<std::size_t>(n) * n);
            std::vector<double> l_parallel = l_serial;
            std::vector<int> perm_serial, perm_parallel;
            const double ts = time_once([&] { serial::lu_inplace(l_serial, n, perm_serial, 0.0); });
            const double tp = time_once([&] { kernels::lu_inplace(l_parallel, n, perm_parallel, 0.0); });
            report("lu", n, ts, tp, max_abs_diff(l_serial, l_parallel));
        }
        std::printf("\n");
    }
    return 0;
}
