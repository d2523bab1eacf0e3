#include "woc/persona.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <unordered_set>

#include "woc/error.hpp"
#include "woc/hashing.hpp"
#include "woc/rng.hpp"

namespace woc::persona {

namespace {

std::vector<std::string> dedupe(std::vector<std::string> options) {
    std::vector<std::string> out;
    for (auto& option : options) {
        if (std::find(out.begin(), out.end(), option) == out.end()) {
            out.push_back(std::move(option));
        }
    }
    return out;
}

std::optional<double> parse_number(std::string_view text) {
    double value = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end || text.empty()) {
        return std::nullopt;
    }
    return value;
}

template <typename T>
bool compare(const T& lhs, Comparator cmp, const T& rhs) {
    switch (cmp) {
        case Comparator::Eq: return lhs == rhs;
        case Comparator::Ne: return lhs != rhs;
        case Comparator::Lt: return lhs < rhs;
        case Comparator::Le: return lhs <= rhs;
        case Comparator::Gt: return lhs > rhs;
        case Comparator::Ge: return lhs >= rhs;
    }
    return false;
}

std::string_view comparator_name(Comparator cmp) {
    switch (cmp) {
        case Comparator::Eq: return "==";
        case Comparator::Ne: return "!=";
        case Comparator::Lt: return "<";
        case Comparator::Le: return "<=";
        case Comparator::Gt: return ">";
        case Comparator::Ge: return ">=";
    }
    return "?";
}

Comparator parse_comparator(std::string_view text) {
    for (Comparator c : {Comparator::Eq, Comparator::Ne, Comparator::Lt, Comparator::Le, Comparator::Gt,
                         Comparator::Ge}) {
        if (comparator_name(c) == text) {
            return c;
        }
    }
    throw Error(ErrorKind::ConfigInvalid, "unknown comparator '" + std::string(text) + "'");
}

ConsistencyRule min_age_rule(std::string id, std::string trigger_attribute, std::string trigger_value,
                             int min_age) {
    ConsistencyRule rule;
    rule.rule_id = std::move(id);
    rule.description = trigger_attribute + " " + trigger_value + " requires Age >= " + std::to_string(min_age);
    rule.trigger_attribute = std::move(trigger_attribute);
    rule.trigger_value = std::move(trigger_value);
    rule.attribute = "Age";
    rule.comparator = Comparator::Ge;
    rule.value = std::to_string(min_age);
    return rule;
}

}  // namespace

AttributeSpace::AttributeSpace(std::vector<Attribute> attributes) : attributes_(std::move(attributes)) {
    for (const auto& attribute : attributes_) {
        if (attribute.options.empty()) {
            throw Error(ErrorKind::ConfigInvalid, "attribute '" + attribute.name + "' has no options");
        }
        if (dedupe(attribute.options).size() != attribute.options.size()) {
            throw Error(ErrorKind::ConfigInvalid, "attribute '" + attribute.name + "' has duplicate options");
        }
    }
}

std::optional<std::size_t> AttributeSpace::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < attributes_.size(); ++i) {
        if (attributes_[i].name == name) {
            return i;
        }
    }
    return std::nullopt;
}

bool AttributeSpace::has_option(std::size_t attribute, std::string_view option) const {
    const auto& options = attributes_.at(attribute).options;
    return std::find(options.begin(), options.end(), option) != options.end();
}

double AttributeSpace::configuration_count() const {
    double count = 1.0;
    for (const auto& attribute : attributes_) {
        count *= static_cast<double>(attribute.options.size());
    }
    return count;
}

AttributeSpace build_attribute_space() {
    std::vector<std::string> ages;
    for (int age = 18; age <= 80; ++age) {
        ages.push_back(std::to_string(age));
    }
    std::vector<Attribute> attributes = {
        {"Age", ages},
        {"Gender", {"Nondisclosed", "Female", "Genderqueer", "Male"}},
        {"Occupation", {"Student", "Retired", "Engineer", "Unemployed", "Teacher", "Doctor", "Artist", "Scientist"}},
        {"Personality Traits",
         {"Extroverted", "Traditional", "Open to Experience", "Pessimistic", "Innovative", "Introverted"}},
        {"Communication Style", {"Empathetic", "Informal", "Mixed", "Humorous", "Direct", "Formal"}},
        {"Interests and Hobbies", {"Video Games", "Painting", "Soccer", "Reading", "Cooking", "Traveling", "Sports"}},
        {"Educational Background", {"High School", "Graduate Degree", "Self-taught", "Bachelor"}},
        {"Cultural Background", {"Middle Eastern", "Western", "Eastern", "Latin American", "African"}},
        // The source table repeats several languages; duplicates are dropped keeping first occurrence.
        {"Language Proficiency",
         dedupe({"English", "Spanish", "Mandarin", "English", "English and Spanish", "French", "Spanish", "Mandarin"})},
        {"Technology Savviness", {"Intermediate", "Novice", "Expert"}},
        {"Preferred Communication Medium", {"Voice", "Mixed", "Video", "Text"}},
        {"Lifestyle", {"Sedentary", "Active"}},
        {"Values and Beliefs", {"Christianity", "Environmentalism", "Traditional", "Humanism", "Islam", "Atheism"}},
        {"Relationship Status", {"Widowed", "Divorced", "In a relationship", "Single", "Married"}},
        {"Economic Status", {"Low income", "High income", "Middle income"}},
        {"Health and Wellness", {"Health-conscious", "Average health", "Healthy"}},
        {"Time Availability", {"Sporadic", "Full-time", "Part-time"}},
        {"Problem-solving Approach", {"Practical", "Creative", "Collaborative", "Analytical"}},
    };
    return AttributeSpace(std::move(attributes));
}

const std::string& PersonaConfig::value(const AttributeSpace& space, std::string_view attribute) const {
    const auto index = space.index_of(attribute);
    if (!index || *index >= values.size()) {
        throw Error(ErrorKind::ConfigInvalid, "unknown attribute '" + std::string(attribute) + "'");
    }
    return values[*index];
}

std::string compute_persona_id(const AttributeSpace& space, const std::vector<std::string>& values) {
    std::string preimage;
    for (std::size_t i = 0; i < space.size(); ++i) {
        append_field(preimage, space.at(i).name);
        append_field(preimage, i < values.size() ? values[i] : std::string());
    }
    return sha256_hex(preimage).substr(0, 16);
}

PersonaConfig make_persona(const AttributeSpace& space, std::vector<std::string> values) {
    PersonaConfig persona;
    persona.persona_id = compute_persona_id(space, values);
    persona.values = std::move(values);
    return persona;
}

void validate_persona(const AttributeSpace& space, const PersonaConfig& persona) {
    if (persona.values.size() != space.size()) {
        throw Error(ErrorKind::ConfigInvalid, "persona has " + std::to_string(persona.values.size()) +
                                                  " values, expected " + std::to_string(space.size()));
    }
    for (std::size_t i = 0; i < space.size(); ++i) {
        if (!space.has_option(i, persona.values[i])) {
            throw Error(ErrorKind::ConfigInvalid,
                        "'" + persona.values[i] + "' is not an option of '" + space.at(i).name + "'");
        }
    }
    if (persona.persona_id != compute_persona_id(space, persona.values)) {
        throw Error(ErrorKind::ConfigInvalid, "persona_id " + persona.persona_id + " does not match its values");
    }
}

std::vector<ConsistencyRule> default_rules() {
    return {
        min_age_rule("retired_min_age", "Occupation", "Retired", 50),
        min_age_rule("doctor_min_age", "Occupation", "Doctor", 22),
        min_age_rule("engineer_min_age", "Occupation", "Engineer", 22),
        min_age_rule("scientist_min_age", "Occupation", "Scientist", 22),
        min_age_rule("teacher_min_age", "Occupation", "Teacher", 22),
        min_age_rule("graduate_degree_min_age", "Educational Background", "Graduate Degree", 22),
    };
}

std::vector<ConsistencyRule> rules_from_json(const nlohmann::json& doc) {
    const auto& list = doc.is_object() && doc.contains("rules") ? doc.at("rules") : doc;
    if (!list.is_array()) {
        throw Error(ErrorKind::ConfigInvalid, "rules document must be an array or {\"rules\": [...]}");
    }
    std::vector<ConsistencyRule> rules;
    try {
        for (const auto& item : list) {
            ConsistencyRule rule;
            rule.rule_id = item.at("rule_id").get<std::string>();
            rule.description = item.value("description", std::string());
            rule.trigger_attribute = item.at("if_attribute").get<std::string>();
            rule.trigger_value = item.at("if_value").get<std::string>();
            rule.attribute = item.at("attribute").get<std::string>();
            rule.comparator = parse_comparator(item.at("comparator").get<std::string>());
            const auto& value = item.at("value");
            rule.value = value.is_string() ? value.get<std::string>() : value.dump();
            rules.push_back(std::move(rule));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ConfigInvalid, std::string("bad rule entry: ") + e.what());
    }
    return rules;
}

nlohmann::json rules_to_json(const std::vector<ConsistencyRule>& rules) {
    nlohmann::ordered_json list = nlohmann::ordered_json::array();
    for (const auto& rule : rules) {
        list.push_back({{"rule_id", rule.rule_id},
                        {"description", rule.description},
                        {"if_attribute", rule.trigger_attribute},
                        {"if_value", rule.trigger_value},
                        {"attribute", rule.attribute},
                        {"comparator", std::string(comparator_name(rule.comparator))},
                        {"value", rule.value}});
    }
    return nlohmann::json::parse(list.dump());
}

std::vector<ConsistencyRule> load_rules(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::IoFailure, "cannot open rules file " + path.string());
    }
    try {
        return rules_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::ConfigInvalid, path.string() + ": " + e.what());
    }
}

std::vector<RuleViolation> check_consistency(const AttributeSpace& space, const PersonaConfig& persona,
                                             const std::vector<ConsistencyRule>& rules) {
    std::vector<RuleViolation> violations;
    for (const auto& rule : rules) {
        const auto trigger = space.index_of(rule.trigger_attribute);
        const auto target = space.index_of(rule.attribute);
        // Rules naming attributes outside the space never fire.
        if (!trigger || !target || *trigger >= persona.values.size() || *target >= persona.values.size()) {
            continue;
        }
        if (persona.values[*trigger] != rule.trigger_value) {
            continue;
        }
        const std::string& actual = persona.values[*target];
        const auto lhs = parse_number(actual);
        const auto rhs = parse_number(rule.value);
        const bool ok = (lhs && rhs) ? compare(*lhs, rule.comparator, *rhs) : compare(actual, rule.comparator, rule.value);
        if (!ok) {
            violations.push_back({rule.rule_id, rule.description});
        }
    }
    return violations;
}

std::vector<PersonaConfig> sample_personas(const AttributeSpace& space, std::size_t n, std::uint64_t seed,
                                           const std::vector<ConsistencyRule>& rules) {
    std::vector<PersonaConfig> personas;
    personas.reserve(n);
    std::unordered_set<std::string> seen;
    Rng rng(seed);
    const std::size_t max_attempts = 100 * n;
    std::size_t attempts = 0;
    while (personas.size() < n) {
        if (attempts++ >= max_attempts) {
            throw Error(ErrorKind::SamplingExhausted, "drew " + std::to_string(personas.size()) + " of " +
                                                          std::to_string(n) + " personas in " +
                                                          std::to_string(max_attempts) + " attempts");
        }
        std::vector<std::string> values;
        values.reserve(space.size());
        for (const auto& attribute : space.attributes()) {
            values.push_back(attribute.options[rng.below(attribute.options.size())]);
        }
        PersonaConfig candidate = make_persona(space, std::move(values));
        if (!check_consistency(space, candidate, rules).empty()) {
            continue;
        }
        if (seen.insert(candidate.persona_id).second) {
            personas.push_back(std::move(candidate));
        }
    }
    return personas;
}

std::string serialize_persona(const AttributeSpace& space, const PersonaConfig& persona) {
    std::string text;
    for (std::size_t i = 0; i < space.size(); ++i) {
        text += space.at(i).name;
        text += ": ";
        text += persona.values.at(i);
        text += '\n';
    }
    return text;
}

PersonaConfig parse_persona(const AttributeSpace& space, std::string_view text) {
    std::vector<std::string> values(space.size());
    std::vector<bool> filled(space.size(), false);
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto eol = text.find('\n');
        std::string_view line = text.substr(0, eol);
        text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (line.empty()) {
            continue;
        }
        const auto colon = line.find(": ");
        if (colon == std::string_view::npos) {
            throw Error(ErrorKind::ConfigInvalid, "persona line " + std::to_string(line_no) + " lacks 'Name: value'");
        }
        const auto index = space.index_of(line.substr(0, colon));
        if (!index) {
            throw Error(ErrorKind::ConfigInvalid, "unknown attribute on persona line " + std::to_string(line_no));
        }
        if (filled[*index]) {
            throw Error(ErrorKind::ConfigInvalid, "duplicate attribute on persona line " + std::to_string(line_no));
        }
        values[*index] = std::string(line.substr(colon + 2));
        filled[*index] = true;
    }
    PersonaConfig persona = make_persona(space, std::move(values));
    validate_persona(space, persona);
    return persona;
}

nlohmann::ordered_json persona_to_json(const AttributeSpace& space, const PersonaConfig& persona) {
    nlohmann::ordered_json values = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < space.size(); ++i) {
        values[space.at(i).name] = persona.values.at(i);
    }
    nlohmann::ordered_json doc;
    doc["persona_id"] = persona.persona_id;
    doc["values"] = std::move(values);
    return doc;
}

PersonaConfig persona_from_json(const AttributeSpace& space, const nlohmann::json& doc) {
    try {
        std::vector<std::string> values;
        const auto& map = doc.at("values");
        for (const auto& attribute : space.attributes()) {
            values.push_back(map.at(attribute.name).get<std::string>());
        }
        if (map.size() != space.size()) {
            throw Error(ErrorKind::ConfigInvalid, "persona has unknown attributes");
        }
        PersonaConfig persona{doc.at("persona_id").get<std::string>(), std::move(values)};
        validate_persona(space, persona);
        return persona;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ConfigInvalid, std::string("bad persona record: ") + e.what());
    }
}

void write_persona_file(const AttributeSpace& space, const std::vector<PersonaConfig>& personas,
                        const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorKind::IoFailure, "cannot open " + path.string() + " for writing");
    }
    for (const auto& persona : personas) {
        out << persona_to_json(space, persona).dump() << '\n';
    }
    if (!out.flush()) {
        throw Error(ErrorKind::IoFailure, "failed writing " + path.string());
    }
}

std::vector<PersonaConfig> read_persona_file(const AttributeSpace& space, const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::IoFailure, "cannot open persona file " + path.string());
    }
    std::vector<PersonaConfig> personas;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        try {
            personas.push_back(persona_from_json(space, nlohmann::json::parse(line)));
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(ErrorKind::ConfigInvalid, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        } catch (const Error& e) {
            throw Error(ErrorKind::ConfigInvalid, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return personas;
}

}  // namespace woc::persona
