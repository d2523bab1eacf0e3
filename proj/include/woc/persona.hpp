#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace woc::persona {

struct Attribute {
    std::string name;
    std::vector<std::string> options;
};

// The 18 social attributes in canonical row order.
class AttributeSpace {
public:
    explicit AttributeSpace(std::vector<Attribute> attributes);

    const std::vector<Attribute>& attributes() const { return attributes_; }
    std::size_t size() const { return attributes_.size(); }
    const Attribute& at(std::size_t index) const { return attributes_.at(index); }
    std::optional<std::size_t> index_of(std::string_view name) const;
    bool has_option(std::size_t attribute, std::string_view option) const;
    // Product of option counts, as a double since it exceeds 2^32 comfortably.
    double configuration_count() const;

private:
    std::vector<Attribute> attributes_;
};

AttributeSpace build_attribute_space();

struct PersonaConfig {
    std::string persona_id;
    // One option per attribute, aligned with AttributeSpace order.
    std::vector<std::string> values;

    bool operator==(const PersonaConfig&) const = default;

    const std::string& value(const AttributeSpace& space, std::string_view attribute) const;
};

// Builds a persona from canonical-order values and stamps its id.
PersonaConfig make_persona(const AttributeSpace& space, std::vector<std::string> values);
// 16 hex chars of SHA-256 over the canonical "Name=value" lines.
std::string compute_persona_id(const AttributeSpace& space, const std::vector<std::string>& values);
// Throws ConfigInvalid when a value is missing or not a listed option.
void validate_persona(const AttributeSpace& space, const PersonaConfig& persona);

enum class Comparator { Eq, Ne, Lt, Le, Gt, Ge };

// When `trigger_attribute == trigger_value`, require `attribute <comparator> value`.
// Comparison is numeric when both sides parse as numbers, textual otherwise.
struct ConsistencyRule {
    std::string rule_id;
    std::string description;
    std::string trigger_attribute;
    std::string trigger_value;
    std::string attribute;
    Comparator comparator = Comparator::Ge;
    std::string value;
};

std::vector<ConsistencyRule> default_rules();
std::vector<ConsistencyRule> rules_from_json(const nlohmann::json& doc);
nlohmann::json rules_to_json(const std::vector<ConsistencyRule>& rules);
std::vector<ConsistencyRule> load_rules(const std::filesystem::path& path);

struct RuleViolation {
    std::string rule_id;
    std::string description;
};

std::vector<RuleViolation> check_consistency(const AttributeSpace& space, const PersonaConfig& persona,
                                             const std::vector<ConsistencyRule>& rules);

std::vector<PersonaConfig> sample_personas(const AttributeSpace& space, std::size_t n, std::uint64_t seed,
                                           const std::vector<ConsistencyRule>& rules);

// "Name: value" per line, canonical order, every line newline-terminated.
std::string serialize_persona(const AttributeSpace& space, const PersonaConfig& persona);
PersonaConfig parse_persona(const AttributeSpace& space, std::string_view text);

nlohmann::ordered_json persona_to_json(const AttributeSpace& space, const PersonaConfig& persona);
PersonaConfig persona_from_json(const AttributeSpace& space, const nlohmann::json& doc);

void write_persona_file(const AttributeSpace& space, const std::vector<PersonaConfig>& personas,
                        const std::filesystem::path& path);
std::vector<PersonaConfig> read_persona_file(const AttributeSpace& space, const std::filesystem::path& path);

}  // namespace woc::persona
