// Serial reference vs OpenMP kernels, and brute-force vs grid blocking.
//   bench_kernels [--L 2048] [--trials 20000] [--threads 0]

#include <chrono>
#include <cstdio>

#include "CLI11.hpp"
#include "hdmetric/contraction.hpp"
#include "hdmetric/coupling.hpp"
#include "hdmetric/dynamics.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace hdmetric;

namespace {

template <class F>
double best_of(int reps, F&& f) {
    double best = 1e300;
    for (int k = 0; k < reps; ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
}

void row(const char* name, double serial, double fast, bool same) {
    std::printf("%-28s %10.4f s %10.4f s %8.2fx  %s\n", name, serial, fast, serial / fast, same ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kernel benchmarks"};
    int L = 2048;
    std::uint64_t trials = 20000;
    int threads = 0;
    app.add_option("--L", L, "Grid cells for kernel assembly");
    app.add_option("--trials", trials, "Coupling trials");
    app.add_option("--threads", threads, "OpenMP threads (0 = all)");
    CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
    std::printf("OpenMP threads available: %d\n", threads > 0 ? threads : omp_get_max_threads());
#else
    std::printf("built without OpenMP\n");
#endif
    std::printf("%-28s %12s %12s %9s\n", "kernel", "reference", "fast", "speedup");

    {
        SavingsKernel a = build_kernel_serial(L, 16, IntegralVariant::Clamped);
        SavingsKernel b = build_kernel(L, 16, IntegralVariant::Clamped, threads);
        const double ts = best_of(3, [&] { a = build_kernel_serial(L, 16, IntegralVariant::Clamped); });
        const double tp = best_of(3, [&] { b = build_kernel(L, 16, IntegralVariant::Clamped, threads); });
        bool same = true;
        for (int i = 0; i < L && same; ++i)
            for (int j = 0; j < i; ++j) same = same && a.at(i, j) == b.at(i, j);
        row("savings kernel assembly", ts, tp, same);
    }

    {
        const PiecewiseMetric metric = max_density(256).metric;
        ContractionOptions o;
        o.threads = threads;
        ContractionEstimate a, b;
        const double ts = best_of(1, [&] { a = estimate_contraction_serial(32, 0.14, 2.0, metric, trials, 1, o); });
        const double tp = best_of(1, [&] { b = estimate_contraction(32, 0.14, 2.0, metric, trials, 1, o); });
        row("coupling trials", ts, tp, a.mean_delta_bound == b.mean_delta_bound && a.outcome_counts == b.outcome_counts);
    }

    {
        const Configuration config = random_config(1024, 0.2, 3);
        const CellGrid grid(config);
        Rng rng(4);
        std::vector<Proposal> queries;
        for (int k = 0; k < 200000; ++k) queries.push_back(propose(config, rng));
        long hits_brute = 0, hits_grid = 0;
        const double tb = best_of(3, [&] {
            hits_brute = 0;
            for (const auto& q : queries) hits_brute += blocked_brute(config, q.point, q.index);
        });
        const double tg = best_of(3, [&] {
            hits_grid = 0;
            for (const auto& q : queries) hits_grid += grid.blocked(config, q.point, q.index);
        });
        row("blocking query, n = 1024", tb, tg, hits_brute == hits_grid);
    }
    return 0;
}
