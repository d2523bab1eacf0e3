#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace woc::crowdstats {

// Closed interval of accepted aggregate estimates, in miles.
struct AcceptanceRange {
    double lo = 1411.0;
    double hi = 1441.0;
    double true_value = 1426.0;

    void validate() const;
    bool operator==(const AcceptanceRange&) const = default;
};

bool in_range(double miles, const AcceptanceRange& range);

enum class AggregatorKind { Mean, Median, TrimmedMean };

struct Aggregator {
    AggregatorKind kind = AggregatorKind::Mean;
    double alpha = 0.0;  // trimmed fraction per tail, [0, 0.5)

    static Aggregator mean() { return {}; }
    static Aggregator median() { return {AggregatorKind::Median, 0.0}; }
    static Aggregator trimmed_mean(double alpha);

    // "mean", "median", "trimmed_mean(0.1)"
    std::string name() const;
    static Aggregator parse(std::string_view text);
    bool operator==(const Aggregator&) const = default;
};

double aggregate(std::span<const double> values, const Aggregator& method);
// Same result as aggregate() for input already sorted ascending; no copy.
double aggregate_sorted(std::span<const double> sorted, const Aggregator& method);

// Fraction of individual responses inside the range.
double response_level_accuracy(std::span<const double> values, const AcceptanceRange& range);

enum class Execution { Serial, Parallel };

struct SamplingOptions {
    std::size_t trials = 1000;
    std::uint64_t seed = 0;
    // Enumerate every k-subset when C(n, k) does not exceed this.
    std::uint64_t exhaustive_cap = 100000;
    Execution execution = Execution::Parallel;
};

struct PointEstimate {
    double accuracy = 0.0;
    double std_error = 0.0;
    std::size_t trials = 0;  // subsets evaluated
    bool exhaustive = false;
};

PointEstimate accuracy_at_size(std::span<const double> values, std::size_t k, const Aggregator& method,
                               const AcceptanceRange& range, const SamplingOptions& options = {});

struct CurvePoint {
    std::size_t k = 0;
    double accuracy = 0.0;
    double std_error = 0.0;
    std::size_t trials = 0;
    bool exhaustive = false;

    bool operator==(const CurvePoint&) const = default;
};

struct CurveMeta {
    std::string label;        // free text, e.g. the prompt type
    std::string aggregator = "mean";
    std::uint64_t seed = 0;
    std::size_t population = 0;
    AcceptanceRange range;
    std::size_t trials = 0;
    std::uint64_t exhaustive_cap = 100000;
    std::optional<double> response_level_accuracy;
    std::size_t excluded = 0;  // responses without an extracted estimate

    bool operator==(const CurveMeta&) const = default;
};

struct AccuracyCurve {
    std::vector<CurvePoint> points;
    CurveMeta meta;

    bool operator==(const AccuracyCurve&) const = default;
};

// Multiples of floor(n / divisions); falls back to 1..n for tiny populations.
std::vector<std::size_t> default_grid(std::size_t n, std::size_t divisions = 28);

AccuracyCurve sweep(std::span<const double> values, std::vector<std::size_t> grid, const Aggregator& method,
                    const AcceptanceRange& range, const SamplingOptions& options = {});

struct OptimalSubsetResult {
    std::size_t k_star = 0;
    double accuracy_at_k_star = 0.0;
    double max_accuracy = 0.0;
    double epsilon = 0.0;
};

OptimalSubsetResult find_optimal(const AccuracyCurve& curve, double epsilon);

// C(n, k), saturating at cap + 1.
std::uint64_t binomial_capped(std::uint64_t n, std::uint64_t k, std::uint64_t cap);

// Curve file: CSV `k,accuracy,stderr,trials,exhaustive` plus a JSON sidecar of meta.
std::string curve_to_csv(const AccuracyCurve& curve);
std::vector<CurvePoint> curve_points_from_csv(std::string_view csv);
nlohmann::ordered_json meta_to_json(const CurveMeta& meta);
CurveMeta meta_from_json(const nlohmann::json& doc);
std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);
void save_curve(const AccuracyCurve& curve, const std::filesystem::path& csv_path,
                const std::optional<nlohmann::ordered_json>& extra = std::nullopt);
AccuracyCurve load_curve(const std::filesystem::path& csv_path);

namespace kernels {

// Hits over `trials` Monte-Carlo k-subsets of `sorted`. Trial t draws from
// the stream (seed, k, t), so serial and parallel kernels agree exactly.
std::size_t monte_carlo_hits_serial(std::span<const double> sorted, std::size_t k, std::size_t trials,
                                    std::uint64_t seed, const Aggregator& method, const AcceptanceRange& range);
std::size_t monte_carlo_hits_parallel(std::span<const double> sorted, std::size_t k, std::size_t trials,
                                      std::uint64_t seed, const Aggregator& method, const AcceptanceRange& range);
// Hits over every k-subset of `sorted`.
std::size_t exhaustive_hits(std::span<const double> sorted, std::size_t k, const Aggregator& method,
                            const AcceptanceRange& range);

// Per-thread scratch shared by the two Monte-Carlo kernels.
class SubsetEvaluator {
public:
    SubsetEvaluator(std::span<const double> sorted, double total);
    // Draws one k-subset from stream (seed, k, t); true when its aggregate is in range.
    bool trial(std::size_t k, std::uint64_t seed, std::uint64_t t, const Aggregator& method,
               const AcceptanceRange& range);
    // Aggregate of the subset given by sorted index list `chosen`; when
    // `complement` is set the list names the excluded indices instead.
    double aggregate_indices(std::span<const std::size_t> chosen, bool complement, std::size_t k,
                             const Aggregator& method);

private:
    std::span<const double> sorted_;
    double total_;
    std::vector<std::uint8_t> mask_;
    std::vector<std::size_t> picked_;
    std::vector<double> buffer_;
};

double sorted_sum(std::span<const double> sorted);

}  // namespace kernels

}  // namespace woc::crowdstats
