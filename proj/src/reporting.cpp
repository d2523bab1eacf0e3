#include "woc/reporting.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "woc/error.hpp"

namespace woc::reporting {

namespace {

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

std::string xml_escape(std::string_view text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

constexpr double kWidth = 800.0;
constexpr double kHeight = 500.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 770.0;
constexpr double kTop = 60.0;
constexpr double kBottom = 420.0;

}  // namespace

TableFormat table_format_from_string(std::string_view name) {
    if (name == "csv") {
        return TableFormat::Csv;
    }
    if (name == "md" || name == "markdown") {
        return TableFormat::Markdown;
    }
    throw Error(ErrorKind::ConfigInvalid, "unknown table format '" + std::string(name) + "' (md | csv)");
}

std::string data_label_for(promptgen::PromptType type) {
    switch (type) {
        case promptgen::PromptType::FullContext: return "Both";
        case promptgen::PromptType::EmotionalOnly: return "Emotions";
        case promptgen::PromptType::AttributesOnly: return "Attributes";
        case promptgen::PromptType::Base: return "Only Prompt";
    }
    return "Unknown";
}

std::string population_label(std::size_t n) { return std::to_string(n) + " roles"; }

SummaryRow summarize(const crowdstats::AccuracyCurve& curve, const crowdstats::OptimalSubsetResult& optimal,
                     std::string data_label) {
    return {std::move(data_label), optimal.k_star, optimal.accuracy_at_k_star * 100.0,
            population_label(curve.meta.population)};
}

std::string summary_table(const std::vector<SummaryRow>& rows, TableFormat format) {
    if (rows.empty()) {
        throw Error(ErrorKind::EmptyInput, "summary table needs at least one row");
    }
    std::string out = format == TableFormat::Csv
                          ? "Data,Optimal Subset Size,Accuracy (%),Size\n"
                          : "| Data | Optimal Subset Size | Accuracy (%) | Size |\n|---|---:|---:|---|\n";
    for (const auto& row : rows) {
        if (!(row.accuracy_pct >= 0.0 && row.accuracy_pct <= 100.0)) {
            throw Error(ErrorKind::ConfigInvalid, "accuracy_pct outside [0, 100] for " + row.data_label);
        }
        const std::string pct = fmt("%.2f", row.accuracy_pct);
        const std::string k = std::to_string(row.optimal_subset_size);
        if (format == TableFormat::Csv) {
            out += row.data_label + "," + k + "," + pct + "," + row.population + "\n";
        } else {
            out += "| " + row.data_label + " | " + k + " | " + pct + " | " + row.population + " |\n";
        }
    }
    return out;
}

std::string curve_svg(const crowdstats::AccuracyCurve& curve, std::string_view title,
                      std::optional<std::size_t> k_star) {
    if (curve.points.empty()) {
        throw Error(ErrorKind::EmptyCurve, "cannot plot an empty curve");
    }
    std::size_t max_k = 0;
    for (const auto& p : curve.points) {
        max_k = std::max(max_k, p.k);
    }
    const auto x_of = [&](double k) { return kLeft + (kRight - kLeft) * k / static_cast<double>(max_k); };
    const auto y_of = [&](double acc) { return kBottom - (kBottom - kTop) * acc; };

    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"800\" height=\"500\" "
           "viewBox=\"0 0 800 500\">\n";
    svg += "<rect x=\"0\" y=\"0\" width=\"" + fmt("%.0f", kWidth) + "\" height=\"" + fmt("%.0f", kHeight) +
           "\" fill=\"white\"/>\n";
    svg += "<text x=\"400\" y=\"32\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"18\">" +
           xml_escape(title) + "</text>\n";

    // Axes and ticks.
    svg += "<g stroke=\"black\" stroke-width=\"1\">\n";
    svg += "<line x1=\"" + fmt("%.2f", kLeft) + "\" y1=\"" + fmt("%.2f", kBottom) + "\" x2=\"" + fmt("%.2f", kRight) +
           "\" y2=\"" + fmt("%.2f", kBottom) + "\"/>\n";
    svg += "<line x1=\"" + fmt("%.2f", kLeft) + "\" y1=\"" + fmt("%.2f", kTop) + "\" x2=\"" + fmt("%.2f", kLeft) +
           "\" y2=\"" + fmt("%.2f", kBottom) + "\"/>\n";
    svg += "</g>\n";
    svg += "<g font-family=\"sans-serif\" font-size=\"12\">\n";
    for (int i = 0; i <= 5; ++i) {
        const double acc = i / 5.0;
        const double y = y_of(acc);
        svg += "<line x1=\"" + fmt("%.2f", kLeft - 5) + "\" y1=\"" + fmt("%.2f", y) + "\" x2=\"" + fmt("%.2f", kLeft) +
               "\" y2=\"" + fmt("%.2f", y) + "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + fmt("%.2f", kLeft - 8) + "\" y=\"" + fmt("%.2f", y + 4) + "\" text-anchor=\"end\">" +
               fmt("%.1f", acc) + "</text>\n";
    }
    for (int i = 0; i <= 4; ++i) {
        const double k = static_cast<double>(max_k) * i / 4.0;
        const double x = x_of(k);
        svg += "<line x1=\"" + fmt("%.2f", x) + "\" y1=\"" + fmt("%.2f", kBottom) + "\" x2=\"" + fmt("%.2f", x) +
               "\" y2=\"" + fmt("%.2f", kBottom + 5) + "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + fmt("%.2f", x) + "\" y=\"" + fmt("%.2f", kBottom + 20) + "\" text-anchor=\"middle\">" +
               fmt("%.0f", k) + "</text>\n";
    }
    svg += "<text x=\"" + fmt("%.2f", (kLeft + kRight) / 2) + "\" y=\"455\" text-anchor=\"middle\">Subset size</text>\n";
    svg += "<text x=\"20\" y=\"" + fmt("%.2f", (kTop + kBottom) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 20 " +
           fmt("%.2f", (kTop + kBottom) / 2) + ")\">Accuracy</text>\n";
    svg += "</g>\n";

    if (curve.points.size() > 1) {
        svg += "<polyline class=\"curve\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < curve.points.size(); ++i) {
            if (i > 0) {
                svg += ' ';
            }
            svg += fmt("%.2f", x_of(static_cast<double>(curve.points[i].k))) + "," +
                   fmt("%.2f", y_of(curve.points[i].accuracy));
        }
        svg += "\"/>\n";
    }
    for (const auto& p : curve.points) {
        svg += "<circle class=\"point\" cx=\"" + fmt("%.2f", x_of(static_cast<double>(p.k))) + "\" cy=\"" +
               fmt("%.2f", y_of(p.accuracy)) + "\" r=\"3\" fill=\"steelblue\"/>\n";
    }
    if (k_star) {
        const double x = x_of(static_cast<double>(*k_star));
        svg += "<line class=\"k-star\" data-k=\"" + std::to_string(*k_star) + "\" x1=\"" + fmt("%.2f", x) + "\" y1=\"" +
               fmt("%.2f", kTop) + "\" x2=\"" + fmt("%.2f", x) + "\" y2=\"" + fmt("%.2f", kBottom) +
               "\" stroke=\"firebrick\" stroke-dasharray=\"6 4\"/>\n";
        svg += "<text x=\"" + fmt("%.2f", x + 6) + "\" y=\"" + fmt("%.2f", kTop + 14) +
               "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"firebrick\">k* = " + std::to_string(*k_star) +
               "</text>\n";
    }
    const auto& meta = curve.meta;
    svg += "<text x=\"400\" y=\"488\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\" "
           "fill=\"#555\">aggregator: " +
           xml_escape(meta.aggregator) + " | trials: " + std::to_string(meta.trials) +
           " | seed: " + std::to_string(meta.seed) + " | N = " + std::to_string(meta.population) + " | range: [" +
           fmt("%g", meta.range.lo) + ", " + fmt("%g", meta.range.hi) + "]</text>\n";
    svg += "</svg>\n";
    return svg;
}

void render_curve_svg(const crowdstats::AccuracyCurve& curve, std::string_view title,
                      std::optional<std::size_t> k_star, const std::filesystem::path& out) {
    const std::string svg = curve_svg(curve, title, k_star);
    std::ofstream file(out, std::ios::binary | std::ios::trunc);
    if (!file || !(file << svg).flush()) {
        throw Error(ErrorKind::IoFailure, "cannot write " + out.string());
    }
}

std::string compare_runs(const crowdstats::AccuracyCurve& a, const crowdstats::AccuracyCurve& b,
                         std::string_view label_a, std::string_view label_b, double epsilon) {
    const auto opt_a = crowdstats::find_optimal(a, epsilon);
    const auto opt_b = crowdstats::find_optimal(b, epsilon);
    std::string rows;
    std::size_t shared = 0;
    for (const auto& pa : a.points) {
        const auto it = std::find_if(b.points.begin(), b.points.end(), [&](const auto& pb) { return pb.k == pa.k; });
        if (it == b.points.end()) {
            continue;
        }
        ++shared;
        rows += std::to_string(pa.k) + "," + fmt("%.4f", pa.accuracy) + "," + fmt("%.4f", it->accuracy) + "," +
                fmt("%.4f", it->accuracy - pa.accuracy) + "\n";
    }
    std::string out;
    if (shared == 0) {
        out += "# warning: curves share no subset sizes; only k* and max accuracy are compared\n";
    }
    out += "k," + std::string(label_a) + "," + std::string(label_b) + ",delta\n";
    out += rows;
    out += "k_star," + std::to_string(opt_a.k_star) + "," + std::to_string(opt_b.k_star) + "," +
           std::to_string(static_cast<long long>(opt_b.k_star) - static_cast<long long>(opt_a.k_star)) + "\n";
    out += "max_accuracy," + fmt("%.4f", opt_a.max_accuracy) + "," + fmt("%.4f", opt_b.max_accuracy) + "," +
           fmt("%.4f", opt_b.max_accuracy - opt_a.max_accuracy) + "\n";
    out += "epsilon," + fmt("%g", epsilon) + "," + fmt("%g", epsilon) + ",\n";
    return out;
}

}  // namespace woc::reporting
