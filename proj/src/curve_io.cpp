#include <charconv>
#include <fstream>
#include <sstream>

#include "woc/crowdstats.hpp"
#include "woc/error.hpp"

namespace woc::crowdstats {

namespace {

std::string shortest(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

template <typename T>
T parse_field(std::string_view field, std::size_t line_no) {
    T value{};
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) {
        throw Error(ErrorKind::ConfigInvalid,
                    "curve CSV line " + std::to_string(line_no) + ": bad field '" + std::string(field) + "'");
    }
    return value;
}

constexpr std::string_view kHeader = "k,accuracy,stderr,trials,exhaustive";

}  // namespace

std::string curve_to_csv(const AccuracyCurve& curve) {
    std::string out(kHeader);
    out += '\n';
    for (const auto& p : curve.points) {
        out += std::to_string(p.k);
        out += ',';
        out += shortest(p.accuracy);
        out += ',';
        out += shortest(p.std_error);
        out += ',';
        out += std::to_string(p.trials);
        out += ',';
        out += p.exhaustive ? "1" : "0";
        out += '\n';
    }
    return out;
}

std::vector<CurvePoint> curve_points_from_csv(std::string_view csv) {
    std::vector<CurvePoint> points;
    std::size_t line_no = 0;
    while (!csv.empty()) {
        const auto eol = csv.find('\n');
        std::string_view line = csv.substr(0, eol);
        csv = eol == std::string_view::npos ? std::string_view{} : csv.substr(eol + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (line_no == 1) {
            if (line != kHeader) {
                throw Error(ErrorKind::ConfigInvalid, "curve CSV must start with header '" + std::string(kHeader) + "'");
            }
            continue;
        }
        if (line.empty()) {
            continue;
        }
        std::vector<std::string_view> fields;
        std::size_t start = 0;
        while (true) {
            const auto comma = line.find(',', start);
            fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
            if (comma == std::string_view::npos) {
                break;
            }
            start = comma + 1;
        }
        if (fields.size() != 5) {
            throw Error(ErrorKind::ConfigInvalid, "curve CSV line " + std::to_string(line_no) + ": expected 5 fields");
        }
        CurvePoint p;
        p.k = parse_field<std::size_t>(fields[0], line_no);
        p.accuracy = parse_field<double>(fields[1], line_no);
        p.std_error = parse_field<double>(fields[2], line_no);
        p.trials = parse_field<std::size_t>(fields[3], line_no);
        p.exhaustive = parse_field<int>(fields[4], line_no) != 0;
        points.push_back(p);
    }
    if (line_no == 0) {
        throw Error(ErrorKind::ConfigInvalid, "curve CSV is empty");
    }
    return points;
}

nlohmann::ordered_json meta_to_json(const CurveMeta& meta) {
    nlohmann::ordered_json doc;
    doc["label"] = meta.label;
    doc["aggregator"] = meta.aggregator;
    doc["seed"] = meta.seed;
    doc["population"] = meta.population;
    doc["range"] = {{"lo", meta.range.lo}, {"hi", meta.range.hi}, {"true_value", meta.range.true_value}};
    doc["trials"] = meta.trials;
    doc["exhaustive_cap"] = meta.exhaustive_cap;
    doc["response_level_accuracy"] =
        meta.response_level_accuracy ? nlohmann::ordered_json(*meta.response_level_accuracy) : nlohmann::ordered_json();
    doc["excluded"] = meta.excluded;
    return doc;
}

CurveMeta meta_from_json(const nlohmann::json& doc) {
    CurveMeta meta;
    try {
        meta.label = doc.value("label", std::string());
        meta.aggregator = doc.value("aggregator", meta.aggregator);
        meta.seed = doc.value("seed", meta.seed);
        meta.population = doc.value("population", meta.population);
        if (doc.contains("range")) {
            const auto& r = doc.at("range");
            meta.range.lo = r.value("lo", meta.range.lo);
            meta.range.hi = r.value("hi", meta.range.hi);
            meta.range.true_value = r.value("true_value", meta.range.true_value);
        }
        meta.trials = doc.value("trials", meta.trials);
        meta.exhaustive_cap = doc.value("exhaustive_cap", meta.exhaustive_cap);
        if (doc.contains("response_level_accuracy") && !doc.at("response_level_accuracy").is_null()) {
            meta.response_level_accuracy = doc.at("response_level_accuracy").get<double>();
        }
        meta.excluded = doc.value("excluded", meta.excluded);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ConfigInvalid, std::string("bad curve metadata: ") + e.what());
    }
    return meta;
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
    auto path = csv_path;
    path.replace_extension(".json");
    return path;
}

void save_curve(const AccuracyCurve& curve, const std::filesystem::path& csv_path,
                const std::optional<nlohmann::ordered_json>& extra) {
    {
        std::ofstream out(csv_path, std::ios::binary | std::ios::trunc);
        if (!out || !(out << curve_to_csv(curve)).flush()) {
            throw Error(ErrorKind::IoFailure, "cannot write " + csv_path.string());
        }
    }
    auto meta = meta_to_json(curve.meta);
    if (extra) {
        for (const auto& [key, value] : extra->items()) {
            meta[key] = value;
        }
    }
    std::ofstream out(sidecar_path(csv_path), std::ios::binary | std::ios::trunc);
    if (!out || !(out << meta.dump(2) << '\n').flush()) {
        throw Error(ErrorKind::IoFailure, "cannot write " + sidecar_path(csv_path).string());
    }
}

AccuracyCurve load_curve(const std::filesystem::path& csv_path) {
    std::ifstream in(csv_path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::IoFailure, "cannot open curve " + csv_path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    AccuracyCurve curve;
    curve.points = curve_points_from_csv(buffer.str());
    const auto meta_path = sidecar_path(csv_path);
    if (std::ifstream meta_in(meta_path, std::ios::binary); meta_in) {
        try {
            curve.meta = meta_from_json(nlohmann::json::parse(meta_in));
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(ErrorKind::ConfigInvalid, meta_path.string() + ": " + e.what());
        }
    }
    return curve;
}

}  // namespace woc::crowdstats
