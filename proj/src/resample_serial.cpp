// Reference implementations of the subset-resampling kernels. The parallel
// kernel in resample_omp.cpp must produce identical hit counts.
#include <algorithm>
#include <numeric>

#include "woc/crowdstats.hpp"
#include "woc/rng.hpp"

namespace woc::crowdstats::kernels {

double sorted_sum(std::span<const double> sorted) {
    double sum = 0.0;
    for (double v : sorted) {
        sum += v;
    }
    return sum;
}

SubsetEvaluator::SubsetEvaluator(std::span<const double> sorted, double total)
    : sorted_(sorted), total_(total), mask_(sorted.size(), 0) {}

double SubsetEvaluator::aggregate_indices(std::span<const std::size_t> chosen, bool complement, std::size_t k,
                                          const Aggregator& method) {
    if (method.kind == AggregatorKind::Mean) {
        double sum = 0.0;
        for (std::size_t i : chosen) {
            sum += sorted_[i];
        }
        return (complement ? total_ - sum : sum) / static_cast<double>(k);
    }
    buffer_.clear();
    if (!complement) {
        for (std::size_t i : chosen) {
            buffer_.push_back(sorted_[i]);
        }
    } else {
        std::size_t next = 0;
        for (std::size_t i = 0; i < sorted_.size(); ++i) {
            if (next < chosen.size() && chosen[next] == i) {
                ++next;
                continue;
            }
            buffer_.push_back(sorted_[i]);
        }
    }
    return aggregate_sorted(buffer_, method);
}

bool SubsetEvaluator::trial(std::size_t k, std::uint64_t seed, std::uint64_t t, const Aggregator& method,
                            const AcceptanceRange& range) {
    const std::size_t n = sorted_.size();
    // Draw whichever of the subset or its complement is smaller.
    const bool complement = k > n / 2;
    const std::size_t m = complement ? n - k : k;
    Rng rng = Rng::stream({seed, static_cast<std::uint64_t>(k), t});

    // Floyd's algorithm: m distinct indices from [0, n).
    picked_.clear();
    for (std::size_t j = n - m; j < n; ++j) {
        const auto r = static_cast<std::size_t>(rng.below(j + 1));
        const std::size_t take = mask_[r] ? j : r;
        mask_[take] = 1;
        picked_.push_back(take);
    }
    for (std::size_t i : picked_) {
        mask_[i] = 0;
    }
    std::sort(picked_.begin(), picked_.end());
    return in_range(aggregate_indices(picked_, complement, k, method), range);
}

std::size_t monte_carlo_hits_serial(std::span<const double> sorted, std::size_t k, std::size_t trials,
                                    std::uint64_t seed, const Aggregator& method, const AcceptanceRange& range) {
    SubsetEvaluator evaluator(sorted, sorted_sum(sorted));
    std::size_t hits = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        hits += evaluator.trial(k, seed, t, method, range) ? 1 : 0;
    }
    return hits;
}

std::size_t exhaustive_hits(std::span<const double> sorted, std::size_t k, const Aggregator& method,
                            const AcceptanceRange& range) {
    const std::size_t n = sorted.size();
    const bool complement = k > n / 2;
    const std::size_t m = complement ? n - k : k;
    SubsetEvaluator evaluator(sorted, sorted_sum(sorted));

    // Lexicographic walk over m-combinations of [0, n).
    std::vector<std::size_t> idx(m);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::size_t hits = 0;
    while (true) {
        hits += in_range(evaluator.aggregate_indices(idx, complement, k, method), range) ? 1 : 0;
        std::size_t pos = m;
        while (pos > 0 && idx[pos - 1] == n - m + pos - 1) {
            --pos;
        }
        if (pos == 0) {
            break;
        }
        ++idx[pos - 1];
        for (std::size_t j = pos; j < m; ++j) {
            idx[j] = idx[j - 1] + 1;
        }
    }
    return hits;
}

}  // namespace woc::crowdstats::kernels
