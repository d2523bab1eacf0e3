#include "woc/emotions.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "woc/error.hpp"
#include "woc/rng.hpp"

namespace woc::emotions {

namespace {

constexpr std::array<std::string_view, kLabelCount> kNames = {
    "admiration", "amusement",   "anger",       "annoyance", "approval",       "caring",  "confusion",
    "curiosity",  "desire",      "disappointment", "disapproval", "disgust",   "embarrassment", "excitement",
    "fear",       "gratitude",   "grief",       "joy",       "love",           "nervousness", "optimism",
    "pride",      "realization", "relief",      "remorse",   "sadness",        "surprise", "neutral",
};

std::vector<std::string_view> split(std::string_view text, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = text.find(sep, start);
        parts.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) {
            return parts;
        }
        start = pos + 1;
    }
}

std::optional<std::vector<int>> parse_label_list(std::string_view field) {
    std::vector<int> labels;
    for (auto part : split(field, ',')) {
        int id = -1;
        auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), id);
        if (part.empty() || ec != std::errc{} || ptr != part.data() + part.size() || id < 0 || id >= kLabelCount) {
            return std::nullopt;
        }
        labels.push_back(id);
    }
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    return labels;
}

std::string joined_names(const std::vector<int>& labels) {
    std::string out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (i > 0) {
            out += ", ";
        }
        out += label_by_id(labels[i]).name;
    }
    return out;
}

bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

}  // namespace

const std::array<EmotionLabel, kLabelCount>& all_labels() {
    static const auto labels = [] {
        std::array<EmotionLabel, kLabelCount> out{};
        for (int i = 0; i < kLabelCount; ++i) {
            out[i] = EmotionLabel{i, kNames[i]};
        }
        return out;
    }();
    return labels;
}

EmotionLabel label_by_id(int id) {
    if (id < 0 || id >= kLabelCount) {
        throw Error(ErrorKind::ConfigInvalid, "emotion id out of range: " + std::to_string(id));
    }
    return all_labels()[id];
}

std::optional<EmotionLabel> label_by_name(std::string_view name) {
    for (const auto& label : all_labels()) {
        if (label.name == name) {
            return label;
        }
    }
    return std::nullopt;
}

ParseResult parse_goemotions(std::istream& in, std::ostream* log) {
    if (!in.good()) {
        throw Error(ErrorKind::IoFailure, "GoEmotions stream is not readable");
    }
    ParseResult result;
    std::string line;
    std::size_t line_no = 0;
    auto skip = [&](std::string_view reason) {
        ++result.skipped;
        result.skipped_lines.push_back(line_no);
        if (log) {
            *log << "goemotions: skipping line " << line_no << ": " << reason << '\n';
        }
    };
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = line;
        if (!view.empty() && view.back() == '\r') {
            view.remove_suffix(1);
        }
        const auto fields = split(view, '\t');
        if (fields.size() != 3) {
            skip("expected 3 tab-separated fields, got " + std::to_string(fields.size()));
            continue;
        }
        auto labels = parse_label_list(fields[1]);
        if (!labels || labels->empty()) {
            skip("bad label list");
            continue;
        }
        std::string text = normalize_text(fields[0]);
        if (text.empty()) {
            skip("empty text after normalization");
            continue;
        }
        result.records.push_back({std::move(text), std::move(*labels), std::string(fields[2])});
    }
    if (in.bad()) {
        throw Error(ErrorKind::IoFailure, "read error at line " + std::to_string(line_no));
    }
    return result;
}

ParseResult parse_goemotions_file(const std::filesystem::path& path, std::ostream* log) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::IoFailure, "cannot open " + path.string());
    }
    return parse_goemotions(in, log);
}

std::string normalize_text(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const auto c = static_cast<unsigned char>(text[i]);
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (c < 0x20 || c == 0x7f) {
            continue;
        }
        // UTF-8 encoded C1 controls U+0080..U+009F.
        if (c == 0xc2 && i + 1 < text.size()) {
            const auto next = static_cast<unsigned char>(text[i + 1]);
            if (next >= 0x80 && next <= 0x9f) {
                ++i;
                continue;
            }
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(c));
    }
    return out;
}

std::string_view to_string(TemplateId id) {
    switch (id) {
        case TemplateId::EmotionToText: return "emotion-to-text";
        case TemplateId::TextToEmotion: return "text-to-emotion";
    }
    return "unknown";
}

TemplateId template_from_string(std::string_view name) {
    if (name == "emotion-to-text" || name == "generation") {
        return TemplateId::EmotionToText;
    }
    if (name == "text-to-emotion" || name == "classification") {
        return TemplateId::TextToEmotion;
    }
    throw Error(ErrorKind::ConfigInvalid, "unknown training template '" + std::string(name) + "'");
}

TrainingExample format_training_example(const GoEmotionsRecord& record, TemplateId template_id) {
    if (record.labels.empty()) {
        throw Error(ErrorKind::EmptyLabels, "record '" + record.example_id + "' has no labels");
    }
    std::vector<int> labels = record.labels;
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    const std::string text = normalize_text(record.text);

    TrainingExample example;
    example.labels = labels;
    switch (template_id) {
        case TemplateId::EmotionToText:
            example.prompt = "### Instruction: Write a short comment expressing the following emotion(s): " +
                             joined_names(labels) + ".\n### Response:";
            example.completion = text;
            break;
        case TemplateId::TextToEmotion:
            example.prompt = "### Instruction: Name the emotion(s) expressed in the following comment.\n### Comment: " +
                             text + "\n### Response:";
            example.completion = joined_names(labels);
            break;
    }
    return example;
}

std::size_t emit_training_file(const std::vector<GoEmotionsRecord>& records, TemplateId template_id,
                               std::ostream& sink) {
    std::size_t written = 0;
    for (const auto& record : records) {
        const TrainingExample example = format_training_example(record, template_id);
        nlohmann::ordered_json line;
        line["prompt"] = example.prompt;
        line["completion"] = example.completion;
        line["labels"] = example.labels;
        sink << line.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace) << '\n';
        if (!sink) {
            throw Error(ErrorKind::IoFailure, "failed writing training example " + std::to_string(written + 1));
        }
        ++written;
    }
    return written;
}

std::string_view to_string(AssignmentMode mode) {
    return mode == AssignmentMode::Balanced ? "balanced" : "uniform-random";
}

AssignmentMode assignment_mode_from_string(std::string_view name) {
    if (name == "balanced") {
        return AssignmentMode::Balanced;
    }
    if (name == "uniform-random" || name == "uniform_random" || name == "uniform") {
        return AssignmentMode::UniformRandom;
    }
    throw Error(ErrorKind::ConfigInvalid, "unknown assignment mode '" + std::string(name) + "'");
}

std::optional<EmotionLabel> EmotionAssignment::emotion_for(std::string_view persona_id) const {
    for (const auto& entry : entries) {
        if (entry.persona_id == persona_id) {
            return entry.emotion;
        }
    }
    return std::nullopt;
}

std::vector<EmotionLabel> assignable_labels(bool include_neutral) {
    std::vector<EmotionLabel> labels(all_labels().begin(), all_labels().end());
    if (!include_neutral) {
        labels.pop_back();
    }
    return labels;
}

EmotionAssignment assign_emotions(const std::vector<persona::PersonaConfig>& personas, AssignmentMode mode,
                                  std::uint64_t seed, bool include_neutral) {
    if (personas.empty()) {
        throw Error(ErrorKind::EmptyInput, "cannot assign emotions to an empty persona list");
    }
    const auto labels = assignable_labels(include_neutral);
    EmotionAssignment assignment;
    assignment.mode = mode;
    assignment.seed = seed;
    assignment.entries.reserve(personas.size());
    Rng rng(seed);

    std::vector<std::size_t> slot(personas.size());
    if (mode == AssignmentMode::Balanced) {
        // Deal labels round-robin over a seeded shuffle of persona positions.
        std::vector<std::size_t> order(personas.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        for (std::size_t i = order.size() - 1; i > 0; --i) {
            std::swap(order[i], order[rng.below(i + 1)]);
        }
        for (std::size_t pos = 0; pos < order.size(); ++pos) {
            slot[order[pos]] = pos % labels.size();
        }
    } else {
        for (auto& s : slot) {
            s = rng.below(labels.size());
        }
    }
    for (std::size_t i = 0; i < personas.size(); ++i) {
        assignment.entries.push_back({personas[i].persona_id, labels[slot[i]]});
    }
    return assignment;
}

void write_assignment_file(const EmotionAssignment& assignment, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorKind::IoFailure, "cannot open " + path.string() + " for writing");
    }
    for (const auto& entry : assignment.entries) {
        nlohmann::ordered_json line;
        line["persona_id"] = entry.persona_id;
        line["emotion"] = entry.emotion.name;
        out << line.dump() << '\n';
    }
    if (!out.flush()) {
        throw Error(ErrorKind::IoFailure, "failed writing " + path.string());
    }
}

EmotionAssignment read_assignment_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::IoFailure, "cannot open assignment file " + path.string());
    }
    EmotionAssignment assignment;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        try {
            const auto doc = nlohmann::json::parse(line);
            const auto name = doc.at("emotion").get<std::string>();
            const auto label = label_by_name(name);
            if (!label) {
                throw Error(ErrorKind::ConfigInvalid, "unknown emotion '" + name + "'");
            }
            assignment.entries.push_back({doc.at("persona_id").get<std::string>(), *label});
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::ConfigInvalid, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return assignment;
}

}  // namespace woc::emotions
