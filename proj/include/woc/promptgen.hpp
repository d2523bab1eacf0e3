#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "woc/emotions.hpp"
#include "woc/persona.hpp"

namespace woc::promptgen {

enum class PromptType { FullContext, EmotionalOnly, AttributesOnly, Base };

inline constexpr PromptType kAllPromptTypes[] = {PromptType::FullContext, PromptType::EmotionalOnly,
                                                 PromptType::AttributesOnly, PromptType::Base};

std::string_view to_string(PromptType type);
PromptType prompt_type_from_string(std::string_view name);
bool uses_persona(PromptType type);
bool uses_emotion(PromptType type);

// Template strings with named placeholders; see templates/prompts_v1.txt.
struct PromptTemplates {
    std::string version;
    std::string role;
    std::string attribute_line;
    std::string emotion;
    std::string question;

    bool operator==(const PromptTemplates&) const = default;
};

const PromptTemplates& default_templates();
PromptTemplates parse_templates(std::string_view text);
PromptTemplates load_templates(const std::filesystem::path& path);
// Location of the shipped template file in the source tree.
std::filesystem::path shipped_template_path();

struct PromptSpec {
    PromptType type = PromptType::Base;
    std::optional<persona::PersonaConfig> persona;
    std::optional<emotions::EmotionLabel> emotion;
    std::string question;
    // Distinguishes otherwise identical prompts (Base and EmotionalOnly replicates).
    std::uint32_t replicate = 0;
    std::string template_version;
    std::string system_message;
    std::string user_message;
    std::string prompt_hash;
};

PromptSpec build_prompt(const persona::AttributeSpace& space, PromptType type,
                        const std::optional<persona::PersonaConfig>& persona,
                        const std::optional<emotions::EmotionLabel>& emotion, std::string_view question,
                        std::uint32_t replicate = 0, const PromptTemplates& templates = default_templates());

// SHA-256 over type, persona serialization, emotion name, question and replicate.
std::string prompt_hash(const persona::AttributeSpace& space, const PromptSpec& spec);

// System and user message joined the way a transcript would show them.
std::string rendered_text(const PromptSpec& spec);

}  // namespace woc::promptgen
