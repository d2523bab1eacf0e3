#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "woc/crowdstats.hpp"
#include "woc/promptgen.hpp"

namespace woc::reporting {

struct SummaryRow {
    std::string data_label;  // "Attributes", "Emotions", "Both", "Only Prompt"
    std::size_t optimal_subset_size = 0;
    double accuracy_pct = 0.0;
    std::string population;  // "15064 roles"
};

enum class TableFormat { Csv, Markdown };

TableFormat table_format_from_string(std::string_view name);
std::string data_label_for(promptgen::PromptType type);
std::string population_label(std::size_t n);

SummaryRow summarize(const crowdstats::AccuracyCurve& curve, const crowdstats::OptimalSubsetResult& optimal,
                     std::string data_label);

// Header `Data,Optimal Subset Size,Accuracy (%),Size`, one line per row in input order.
std::string summary_table(const std::vector<SummaryRow>& rows, TableFormat format);

// Standalone SVG 1.1, 800x500 viewBox, byte-identical for identical inputs.
std::string curve_svg(const crowdstats::AccuracyCurve& curve, std::string_view title,
                      std::optional<std::size_t> k_star = std::nullopt);
void render_curve_svg(const crowdstats::AccuracyCurve& curve, std::string_view title,
                      std::optional<std::size_t> k_star, const std::filesystem::path& out);

// Accuracy deltas (b - a) per shared k, then k* and max-accuracy deltas.
std::string compare_runs(const crowdstats::AccuracyCurve& a, const crowdstats::AccuracyCurve& b,
                         std::string_view label_a, std::string_view label_b, double epsilon);

}  // namespace woc::reporting
