#include "woc/crowdstats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "woc/error.hpp"

namespace woc::crowdstats {

void AcceptanceRange::validate() const {
    if (!(lo <= true_value && true_value <= hi)) {
        throw Error(ErrorKind::ConfigInvalid, "acceptance range must satisfy lo <= true_value <= hi");
    }
}

bool in_range(double miles, const AcceptanceRange& range) { return range.lo <= miles && miles <= range.hi; }

Aggregator Aggregator::trimmed_mean(double alpha) {
    if (!(alpha >= 0.0 && alpha < 0.5)) {
        throw Error(ErrorKind::ConfigInvalid, "trimmed mean alpha must lie in [0, 0.5)");
    }
    return {AggregatorKind::TrimmedMean, alpha};
}

std::string Aggregator::name() const {
    switch (kind) {
        case AggregatorKind::Mean: return "mean";
        case AggregatorKind::Median: return "median";
        case AggregatorKind::TrimmedMean: {
            char buf[64];
            std::snprintf(buf, sizeof buf, "trimmed_mean(%g)", alpha);
            return buf;
        }
    }
    return "mean";
}

Aggregator Aggregator::parse(std::string_view text) {
    if (text == "mean") {
        return mean();
    }
    if (text == "median") {
        return median();
    }
    constexpr std::string_view prefix = "trimmed_mean(";
    if (text.size() > prefix.size() + 1 && text.substr(0, prefix.size()) == prefix && text.back() == ')') {
        const auto inner = text.substr(prefix.size(), text.size() - prefix.size() - 1);
        double alpha = 0.0;
        auto [ptr, ec] = std::from_chars(inner.data(), inner.data() + inner.size(), alpha);
        if (ec == std::errc{} && ptr == inner.data() + inner.size()) {
            return trimmed_mean(alpha);
        }
    }
    throw Error(ErrorKind::ConfigInvalid,
                "unknown aggregator '" + std::string(text) + "' (mean | median | trimmed_mean(a))");
}

double aggregate_sorted(std::span<const double> sorted, const Aggregator& method) {
    const std::size_t n = sorted.size();
    if (n == 0) {
        throw Error(ErrorKind::EmptyInput, "cannot aggregate an empty set");
    }
    switch (method.kind) {
        case AggregatorKind::Mean: return kernels::sorted_sum(sorted) / static_cast<double>(n);
        case AggregatorKind::Median:
            return n % 2 == 1 ? sorted[n / 2] : (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;
        case AggregatorKind::TrimmedMean: {
            // The small slack keeps alpha * n = integer cases from flooring down.
            const auto g = static_cast<std::size_t>(std::floor(method.alpha * static_cast<double>(n) + 1e-9));
            if (2 * g >= n) {
                throw Error(ErrorKind::EmptyInput, "trimming leaves no values");
            }
            return kernels::sorted_sum(sorted.subspan(g, n - 2 * g)) / static_cast<double>(n - 2 * g);
        }
    }
    return 0.0;
}

double aggregate(std::span<const double> values, const Aggregator& method) {
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    return aggregate_sorted(sorted, method);
}

double response_level_accuracy(std::span<const double> values, const AcceptanceRange& range) {
    if (values.empty()) {
        throw Error(ErrorKind::EmptyInput, "no responses");
    }
    const auto hits = std::count_if(values.begin(), values.end(), [&](double v) { return in_range(v, range); });
    return static_cast<double>(hits) / static_cast<double>(values.size());
}

std::uint64_t binomial_capped(std::uint64_t n, std::uint64_t k, std::uint64_t cap) {
    if (k > n) {
        return 0;
    }
    k = std::min(k, n - k);
    const std::uint64_t limit = cap == UINT64_MAX ? cap : cap + 1;
    unsigned __int128 c = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        // Exact at every step: c * (n - k + i) is divisible by i.
        c = c * (n - k + i) / i;
        if (c >= limit) {
            return limit;
        }
    }
    return static_cast<std::uint64_t>(c);
}

PointEstimate accuracy_at_size(std::span<const double> values, std::size_t k, const Aggregator& method,
                               const AcceptanceRange& range, const SamplingOptions& options) {
    const std::size_t n = values.size();
    if (k < 1 || k > n) {
        throw Error(ErrorKind::InvalidK, "k = " + std::to_string(k) + " outside 1.." + std::to_string(n));
    }
    if (options.trials < 1) {
        throw Error(ErrorKind::InvalidK, "trials must be >= 1");
    }
    if (method.kind == AggregatorKind::TrimmedMean &&
        2 * static_cast<std::size_t>(std::floor(method.alpha * static_cast<double>(k) + 1e-9)) >= k) {
        throw Error(ErrorKind::InvalidK, "trimming removes every value at k = " + std::to_string(k));
    }
    // Canonical order makes results independent of input order.
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());

    PointEstimate estimate;
    const std::uint64_t subsets = binomial_capped(n, k, options.exhaustive_cap);
    if (subsets <= options.exhaustive_cap) {
        const std::size_t hits = kernels::exhaustive_hits(sorted, k, method, range);
        estimate.accuracy = static_cast<double>(hits) / static_cast<double>(subsets);
        estimate.std_error = 0.0;
        estimate.trials = subsets;
        estimate.exhaustive = true;
        return estimate;
    }
    const std::size_t hits =
        options.execution == Execution::Parallel
            ? kernels::monte_carlo_hits_parallel(sorted, k, options.trials, options.seed, method, range)
            : kernels::monte_carlo_hits_serial(sorted, k, options.trials, options.seed, method, range);
    const double p = static_cast<double>(hits) / static_cast<double>(options.trials);
    estimate.accuracy = p;
    estimate.std_error = std::sqrt(p * (1.0 - p) / static_cast<double>(options.trials));
    estimate.trials = options.trials;
    estimate.exhaustive = false;
    return estimate;
}

std::vector<std::size_t> default_grid(std::size_t n, std::size_t divisions) {
    std::vector<std::size_t> grid;
    const std::size_t step = divisions == 0 ? 0 : n / divisions;
    if (step == 0) {
        for (std::size_t k = 1; k <= n; ++k) {
            grid.push_back(k);
        }
        return grid;
    }
    for (std::size_t m = 1; m <= divisions; ++m) {
        grid.push_back(step * m);
    }
    return grid;
}

AccuracyCurve sweep(std::span<const double> values, std::vector<std::size_t> grid, const Aggregator& method,
                    const AcceptanceRange& range, const SamplingOptions& options) {
    if (grid.empty()) {
        throw Error(ErrorKind::InvalidK, "empty subset-size grid");
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    for (std::size_t k : grid) {
        if (k < 1 || k > values.size()) {
            throw Error(ErrorKind::InvalidK,
                        "grid size " + std::to_string(k) + " outside 1.." + std::to_string(values.size()));
        }
    }
    AccuracyCurve curve;
    curve.meta.aggregator = method.name();
    curve.meta.seed = options.seed;
    curve.meta.population = values.size();
    curve.meta.range = range;
    curve.meta.trials = options.trials;
    curve.meta.exhaustive_cap = options.exhaustive_cap;
    for (std::size_t k : grid) {
        const auto e = accuracy_at_size(values, k, method, range, options);
        curve.points.push_back({k, e.accuracy, e.std_error, e.trials, e.exhaustive});
    }
    return curve;
}

OptimalSubsetResult find_optimal(const AccuracyCurve& curve, double epsilon) {
    if (curve.points.empty()) {
        throw Error(ErrorKind::EmptyCurve, "cannot pick a subset size from an empty curve");
    }
    if (epsilon < 0.0) {
        throw Error(ErrorKind::ConfigInvalid, "epsilon must be >= 0");
    }
    OptimalSubsetResult result;
    result.epsilon = epsilon;
    for (const auto& p : curve.points) {
        result.max_accuracy = std::max(result.max_accuracy, p.accuracy);
    }
    // 1e-12 absorbs rounding in (max - epsilon) for decimal inputs.
    const double threshold = result.max_accuracy - epsilon - 1e-12;
    const CurvePoint* best = nullptr;
    for (const auto& p : curve.points) {
        if (p.accuracy >= threshold && (!best || p.k < best->k)) {
            best = &p;
        }
    }
    result.k_star = best->k;
    result.accuracy_at_k_star = best->accuracy;
    return result;
}

}  // namespace woc::crowdstats
