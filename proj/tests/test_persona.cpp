#include <doctest.h>

#include <chrono>
#include <set>

#include "test_support.hpp"
#include "woc/error.hpp"
#include "woc/persona.hpp"

using namespace woc;
using namespace woc::persona;

namespace {

std::vector<std::string> reference_values() {
    return {"34",       "Female",  "Engineer", "Innovative", "Direct",  "Cooking",       "Bachelor",
            "Eastern",  "Mandarin", "Expert",  "Text",       "Active",  "Humanism",      "Married",
            "Middle income", "Healthy", "Part-time", "Creative"};
}

}  // namespace

TEST_CASE("attribute space has 18 attributes in table order") {
    const auto space = build_attribute_space();
    REQUIRE(space.size() == 18);
    CHECK(space.at(0).name == "Age");
    CHECK(space.at(0).options.size() == 63);
    CHECK(space.at(17).name == "Problem-solving Approach");
    CHECK(space.at(*space.index_of("Language Proficiency")).options.size() == 5);
    CHECK(space.configuration_count() > 15064.0);
}

TEST_CASE("persona id is a stable hash of the ordered values") {
    const auto space = build_attribute_space();
    const auto p = make_persona(space, reference_values());
    // Oracle: tests/oracles/derive.py
    CHECK(p.persona_id == "2ead2f6012e045ec");
    CHECK(p.value(space, "Occupation") == "Engineer");
}

TEST_CASE("validation rejects unknown options and wrong arity") {
    const auto space = build_attribute_space();
    CHECK_NOTHROW(validate_persona(space, make_persona(space, reference_values())));
    auto values = reference_values();
    values[1] = "Robot";
    CHECK_THROWS_AS(validate_persona(space, make_persona(space, values)), Error);
    values = reference_values();
    values.pop_back();
    CHECK_THROWS_AS(validate_persona(space, make_persona(space, values)), Error);
    auto tampered = make_persona(space, reference_values());
    tampered.persona_id = "0000000000000000";
    CHECK_THROWS_AS(validate_persona(space, tampered), Error);
}

TEST_CASE("default rules flag implausible combinations") {
    const auto space = build_attribute_space();
    auto values = reference_values();
    values[0] = "19";
    values[2] = "Retired";
    const auto p = make_persona(space, values);
    const auto violations = check_consistency(space, p, default_rules());
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].rule_id == "retired_min_age");

    values[2] = "Doctor";
    values[6] = "Graduate Degree";
    CHECK(check_consistency(space, make_persona(space, values), default_rules()).size() == 2);
    CHECK(check_consistency(space, make_persona(space, reference_values()), default_rules()).empty());
}

TEST_CASE("rules round-trip through JSON") {
    const auto rules = default_rules();
    const auto back = rules_from_json(rules_to_json(rules));
    REQUIRE(back.size() == rules.size());
    for (std::size_t i = 0; i < rules.size(); ++i) {
        CHECK(back[i].rule_id == rules[i].rule_id);
        CHECK(back[i].comparator == rules[i].comparator);
        CHECK(back[i].value == rules[i].value);
    }
    CHECK_THROWS_AS(rules_from_json(nlohmann::json::parse(R"([{"rule_id":"x","if_attribute":"Occupation",
        "if_value":"Retired","attribute":"Age","comparator":"=>","value":"1"}])")),
                    Error);
    // Rules over attributes the space lacks load but never fire.
    const auto inert = rules_from_json(nlohmann::json::parse(R"([{"rule_id":"x","if_attribute":"Nope",
        "if_value":"a","attribute":"Age","comparator":">=","value":"99"}])"));
    const auto space = build_attribute_space();
    CHECK(check_consistency(space, make_persona(space, reference_values()), inert).empty());
}

TEST_CASE("sampling is deterministic, distinct and rule-satisfying") {
    const auto space = build_attribute_space();
    const auto rules = default_rules();
    const auto a = sample_personas(space, 2000, 99, rules);
    const auto b = sample_personas(space, 2000, 99, rules);
    const auto c = sample_personas(space, 2000, 100, rules);
    REQUIRE(a.size() == 2000);
    std::set<std::string> ids;
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].persona_id == b[i].persona_id);
        ids.insert(a[i].persona_id);
        CHECK(check_consistency(space, a[i], rules).empty());
    }
    CHECK(ids.size() == 2000);
    CHECK(a[0].persona_id != c[0].persona_id);
}

TEST_CASE("sampling more than the space holds fails") {
    const AttributeSpace tiny({{"Age", {"30", "60"}}, {"Occupation", {"Retired", "Teacher"}}});
    const auto rules = default_rules();
    CHECK(sample_personas(tiny, 3, 1, rules).size() == 3);
    try {
        sample_personas(tiny, 4, 1, rules);
        FAIL("expected SamplingExhausted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::SamplingExhausted);
    }
}

TEST_CASE("serialization round-trips and files round-trip") {
    const auto space = build_attribute_space();
    const auto p = make_persona(space, reference_values());
    const auto text = serialize_persona(space, p);
    CHECK(text.rfind("Age: 34\nGender: Female\n", 0) == 0);
    CHECK(parse_persona(space, text).persona_id == p.persona_id);

    test::TempDir dir("persona");
    const auto personas = sample_personas(space, 50, 5, default_rules());
    write_persona_file(space, personas, dir / "p.jsonl");
    const auto back = read_persona_file(space, dir / "p.jsonl");
    REQUIRE(back.size() == 50);
    CHECK(back[49].persona_id == personas[49].persona_id);
    CHECK_THROWS_AS(read_persona_file(space, dir / "missing.jsonl"), Error);
}
