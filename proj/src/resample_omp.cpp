#include "woc/crowdstats.hpp"

namespace woc::crowdstats::kernels {

std::size_t monte_carlo_hits_parallel(std::span<const double> sorted, std::size_t k, std::size_t trials,
                                      std::uint64_t seed, const Aggregator& method, const AcceptanceRange& range) {
    const double total = sorted_sum(sorted);
    const auto count = static_cast<long long>(trials);
    long long hits = 0;
#pragma omp parallel reduction(+ : hits)
    {
        SubsetEvaluator evaluator(sorted, total);
#pragma omp for schedule(static)
        for (long long t = 0; t < count; ++t) {
            hits += evaluator.trial(k, seed, static_cast<std::uint64_t>(t), method, range) ? 1 : 0;
        }
    }
    return static_cast<std::size_t>(hits);
}

}  // namespace woc::crowdstats::kernels
