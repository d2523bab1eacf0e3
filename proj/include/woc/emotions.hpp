#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "woc/persona.hpp"

namespace woc::emotions {

inline constexpr int kLabelCount = 28;
inline constexpr int kNeutralId = 27;

struct EmotionLabel {
    int id = 0;
    std::string_view name;

    bool operator==(const EmotionLabel&) const = default;
};

// GoEmotions ids: the 27 emotions alphabetically, then neutral.
const std::array<EmotionLabel, kLabelCount>& all_labels();
EmotionLabel label_by_id(int id);
std::optional<EmotionLabel> label_by_name(std::string_view name);

struct GoEmotionsRecord {
    std::string text;
    std::vector<int> labels;  // sorted, unique
    std::string example_id;
};

struct ParseResult {
    std::vector<GoEmotionsRecord> records;
    std::size_t skipped = 0;
    std::vector<std::size_t> skipped_lines;  // 1-based
};

// text TAB comma-separated ids TAB example id. Malformed lines are counted and
// reported on `log` (when given), never fatal.
ParseResult parse_goemotions(std::istream& in, std::ostream* log = nullptr);
ParseResult parse_goemotions_file(const std::filesystem::path& path, std::ostream* log = nullptr);

// Strips control characters and collapses whitespace; keeps case, punctuation and emoji.
std::string normalize_text(std::string_view text);

enum class TemplateId { EmotionToText, TextToEmotion };

std::string_view to_string(TemplateId id);
TemplateId template_from_string(std::string_view name);

struct TrainingExample {
    std::string prompt;
    std::string completion;
    std::vector<int> labels;
};

TrainingExample format_training_example(const GoEmotionsRecord& record, TemplateId template_id);

std::size_t emit_training_file(const std::vector<GoEmotionsRecord>& records, TemplateId template_id,
                               std::ostream& sink);

enum class AssignmentMode { Balanced, UniformRandom };

std::string_view to_string(AssignmentMode mode);
AssignmentMode assignment_mode_from_string(std::string_view name);

struct AssignmentEntry {
    std::string persona_id;
    EmotionLabel emotion;
};

struct EmotionAssignment {
    AssignmentMode mode = AssignmentMode::Balanced;
    std::uint64_t seed = 0;
    std::vector<AssignmentEntry> entries;  // same order as the input personas

    std::optional<EmotionLabel> emotion_for(std::string_view persona_id) const;
};

// Labels available for assignment, in id order.
std::vector<EmotionLabel> assignable_labels(bool include_neutral);

EmotionAssignment assign_emotions(const std::vector<persona::PersonaConfig>& personas, AssignmentMode mode,
                                  std::uint64_t seed, bool include_neutral = true);

void write_assignment_file(const EmotionAssignment& assignment, const std::filesystem::path& path);
EmotionAssignment read_assignment_file(const std::filesystem::path& path);

}  // namespace woc::emotions
