#include "woc/promptgen.hpp"

#include <fstream>
#include <sstream>

#include "woc/error.hpp"
#include "woc/hashing.hpp"

namespace woc::promptgen {

namespace {

std::string replace_all(std::string text, std::string_view from, std::string_view to) {
    std::size_t pos = 0;
    while ((pos = text.find(from, pos)) != std::string::npos) {
        text.replace(pos, from.size(), to);
        pos += to.size();
    }
    return text;
}

std::string placeholder(std::string_view name) { return "{" + std::string(name) + "}"; }

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::string render_persona_block(const persona::AttributeSpace& space, const persona::PersonaConfig& persona,
                                 const PromptTemplates& templates) {
    std::string block = templates.role;
    std::string lines;
    for (std::size_t i = 0; i < space.size(); ++i) {
        const auto& name = space.at(i).name;
        const std::string token = placeholder(name);
        if (templates.role.find(token) != std::string::npos) {
            block = replace_all(std::move(block), token, persona.values.at(i));
            continue;
        }
        std::string line = replace_all(templates.attribute_line, "{attribute}", name);
        lines += '\n';
        lines += replace_all(std::move(line), "{value}", persona.values.at(i));
    }
    return block + lines;
}

}  // namespace

std::string_view to_string(PromptType type) {
    switch (type) {
        case PromptType::FullContext: return "full_context";
        case PromptType::EmotionalOnly: return "emotional_only";
        case PromptType::AttributesOnly: return "attributes_only";
        case PromptType::Base: return "base";
    }
    return "unknown";
}

PromptType prompt_type_from_string(std::string_view name) {
    for (PromptType type : kAllPromptTypes) {
        if (to_string(type) == name) {
            return type;
        }
    }
    throw Error(ErrorKind::ConfigInvalid, "unknown prompt type '" + std::string(name) + "'");
}

bool uses_persona(PromptType type) { return type == PromptType::FullContext || type == PromptType::AttributesOnly; }
bool uses_emotion(PromptType type) { return type == PromptType::FullContext || type == PromptType::EmotionalOnly; }

PromptTemplates parse_templates(std::string_view text) {
    PromptTemplates templates;
    std::string* section = nullptr;
    std::istringstream in{std::string(text)};
    std::string raw;
    auto flush_trailing = [](std::string* s) {
        while (s && !s->empty() && s->back() == '\n') {
            s->pop_back();
        }
    };
    while (std::getline(in, raw)) {
        std::string_view line = raw;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (!line.empty() && line.front() == '#') {
            continue;
        }
        if (line.size() > 2 && line.front() == '[' && line.back() == ']') {
            flush_trailing(section);
            const auto name = line.substr(1, line.size() - 2);
            if (name == "role") section = &templates.role;
            else if (name == "attribute_line") section = &templates.attribute_line;
            else if (name == "emotion") section = &templates.emotion;
            else if (name == "question") section = &templates.question;
            else throw Error(ErrorKind::ConfigInvalid, "unknown template section [" + std::string(name) + "]");
            continue;
        }
        if (!section) {
            const auto eq = line.find('=');
            if (eq != std::string_view::npos && trim(line.substr(0, eq)) == "version") {
                templates.version = std::string(trim(line.substr(eq + 1)));
            } else if (!trim(line).empty()) {
                throw Error(ErrorKind::ConfigInvalid, "unexpected template header line: " + raw);
            }
            continue;
        }
        if (section->empty() && trim(line).empty()) {
            continue;
        }
        if (!section->empty()) {
            *section += '\n';
        }
        *section += line;
    }
    flush_trailing(section);
    if (templates.version.empty() || templates.role.empty() || templates.attribute_line.empty() ||
        templates.emotion.empty() || templates.question.empty()) {
        throw Error(ErrorKind::ConfigInvalid, "template file must define version and all four sections");
    }
    return templates;
}

PromptTemplates load_templates(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::IoFailure, "cannot open template file " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_templates(buffer.str());
}

std::filesystem::path shipped_template_path() {
#ifdef WOC_TEMPLATE_DIR
    return std::filesystem::path(WOC_TEMPLATE_DIR) / "prompts_v1.txt";
#else
    return "templates/prompts_v1.txt";
#endif
}

const PromptTemplates& default_templates() {
    static const PromptTemplates templates{
        "v1",
        "You are a {Age}-year-old {Gender} {Occupation}.",
        "{attribute}: {value}",
        "You are currently feeling {emotion}. Let this emotional state influence how you think and answer.",
        "What is the distance in miles between Fargo, North Dakota and Seattle, Washington? "
        "Respond with your best single numeric estimate in miles.",
    };
    return templates;
}

PromptSpec build_prompt(const persona::AttributeSpace& space, PromptType type,
                        const std::optional<persona::PersonaConfig>& persona,
                        const std::optional<emotions::EmotionLabel>& emotion, std::string_view question,
                        std::uint32_t replicate, const PromptTemplates& templates) {
    if (question.empty()) {
        throw Error(ErrorKind::ConfigInvalid, "core question must not be empty");
    }
    if (uses_persona(type) != persona.has_value()) {
        throw Error(ErrorKind::ComponentMismatch, std::string(to_string(type)) +
                                                      (persona ? " does not take persona attributes"
                                                               : " requires persona attributes"));
    }
    if (uses_emotion(type) != emotion.has_value()) {
        throw Error(ErrorKind::ComponentMismatch,
                    std::string(to_string(type)) + (emotion ? " does not take an emotion" : " requires an emotion"));
    }
    if (persona) {
        persona::validate_persona(space, *persona);
    }

    PromptSpec spec;
    spec.type = type;
    spec.persona = persona;
    spec.emotion = emotion;
    spec.question = std::string(question);
    spec.replicate = replicate;
    spec.template_version = templates.version;

    spec.user_message = spec.question;
    if (persona) {
        spec.system_message = render_persona_block(space, *persona, templates);
        if (emotion) {
            spec.system_message += '\n' + replace_all(templates.emotion, "{emotion}", emotion->name);
        }
    } else if (emotion) {
        // No role to attach it to, so the emotional framing leads the user turn.
        spec.user_message = replace_all(templates.emotion, "{emotion}", emotion->name) + "\n\n" + spec.question;
    }
    spec.prompt_hash = prompt_hash(space, spec);
    return spec;
}

std::string prompt_hash(const persona::AttributeSpace& space, const PromptSpec& spec) {
    std::string preimage;
    append_field(preimage, to_string(spec.type));
    append_field(preimage, spec.persona ? persona::serialize_persona(space, *spec.persona) : std::string());
    append_field(preimage, spec.emotion ? spec.emotion->name : std::string_view{});
    append_field(preimage, spec.question);
    append_field(preimage, std::to_string(spec.replicate));
    return sha256_hex(preimage);
}

std::string rendered_text(const PromptSpec& spec) {
    if (spec.system_message.empty()) {
        return spec.user_message;
    }
    return spec.system_message + "\n\n" + spec.user_message;
}

}  // namespace woc::promptgen
