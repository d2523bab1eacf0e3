// Serial reference kernel vs the OpenMP kernel on a synthetic normal crowd.
// Usage: bench_resample [n] [trials] [repeats]
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "woc/crowdstats.hpp"
#include "woc/rng.hpp"

using namespace woc;
using Clock = std::chrono::steady_clock;

namespace {

std::vector<double> synthetic_crowd(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> values(n);
    for (auto& v : values) {
        // Box-Muller is plenty for a benchmark payload.
        const double u1 = rng.unit_open();
        const double u2 = rng.unit_open();
        v = 1426.0 + 300.0 * std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }
    std::sort(values.begin(), values.end());
    return values;
}

template <typename F>
double best_of(int repeats, F&& f) {
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        const auto t0 = Clock::now();
        f();
        best = std::min(best, std::chrono::duration<double>(Clock::now() - t0).count());
    }
    return best;
}

}  // namespace

int main(int argc, char** argv) {
    const std::size_t n = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 15064;
    const std::size_t trials = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 1000;
    const int repeats = argc > 3 ? std::atoi(argv[3]) : 3;
    const auto values = synthetic_crowd(n, 11);
    const auto method = crowdstats::Aggregator::mean();
    const crowdstats::AcceptanceRange range;

#ifdef _OPENMP
    const int threads = omp_get_max_threads();
#else
    const int threads = 1;
#endif
    std::printf("n=%zu trials=%zu threads=%d\n", n, trials, threads);
    std::printf("%8s %12s %12s %8s %s\n", "k", "serial_s", "parallel_s", "speedup", "hits");
    int mismatches = 0;
    for (std::size_t k : crowdstats::default_grid(n, 7)) {
        std::size_t serial_hits = 0;
        std::size_t parallel_hits = 0;
        const double ts = best_of(repeats, [&] {
            serial_hits = crowdstats::kernels::monte_carlo_hits_serial(values, k, trials, 5, method, range);
        });
        const double tp = best_of(repeats, [&] {
            parallel_hits = crowdstats::kernels::monte_carlo_hits_parallel(values, k, trials, 5, method, range);
        });
        mismatches += serial_hits != parallel_hits;
        std::printf("%8zu %12.4f %12.4f %8.2f %zu%s\n", k, ts, tp, ts / tp, serial_hits,
                    serial_hits == parallel_hits ? "" : " MISMATCH");
    }
    return mismatches == 0 ? 0 : 1;
}
