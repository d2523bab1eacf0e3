#include <doctest.h>

#include <set>

#include "test_support.hpp"
#include "woc/emotions.hpp"
#include "woc/error.hpp"
#include "woc/persona.hpp"
#include "woc/promptgen.hpp"

using namespace woc;
using namespace woc::promptgen;

namespace {

persona::PersonaConfig reference_persona(const persona::AttributeSpace& space) {
    return persona::make_persona(space, {"34", "Female", "Engineer", "Innovative", "Direct", "Cooking", "Bachelor",
                                         "Eastern", "Mandarin", "Expert", "Text", "Active", "Humanism", "Married",
                                         "Middle income", "Healthy", "Part-time", "Creative"});
}

const std::string& question() { return default_templates().question; }

}  // namespace

TEST_CASE("shipped template file equals the built-in templates") {
    const auto loaded = load_templates(shipped_template_path());
    const auto& builtin = default_templates();
    CHECK(loaded.version == "v1");
    CHECK(loaded.version == builtin.version);
    CHECK(loaded.role == builtin.role);
    CHECK(loaded.attribute_line == builtin.attribute_line);
    CHECK(loaded.emotion == builtin.emotion);
    CHECK(loaded.question == builtin.question);
}

TEST_CASE("template parser rejects missing sections") {
    CHECK_THROWS_AS(parse_templates("version = v2\n[role]\nYou are {Age}.\n"), Error);
}

TEST_CASE("prompt hashes match the independent oracle") {
    const auto space = persona::build_attribute_space();
    const auto p = reference_persona(space);
    const auto joy = *emotions::label_by_name("joy");
    const auto love = *emotions::label_by_name("love");
    CHECK(build_prompt(space, PromptType::Base, std::nullopt, std::nullopt, question(), 0).prompt_hash ==
          "b65ba84839df0a5c8e3097aaffbfa0d287159226cba71db8e87f36272139bc29");
    CHECK(build_prompt(space, PromptType::Base, std::nullopt, std::nullopt, question(), 1).prompt_hash ==
          "a89446a8dc454df8171628c292d5ae9e2a29700468de08ace723bf42460f51a8");
    CHECK(build_prompt(space, PromptType::EmotionalOnly, std::nullopt, joy, question(), 0).prompt_hash ==
          "aaa38063d7b3e5751b639bf2d19a51a8cddfe29243fd950d2c145734b4d9909e");
    CHECK(build_prompt(space, PromptType::AttributesOnly, p, std::nullopt, question(), 0).prompt_hash ==
          "bceb9983bd7ff85a409432b047c5ffa1afea8a32405069bb69b2580eb64e491f");
    CHECK(build_prompt(space, PromptType::FullContext, p, love, question(), 0).prompt_hash ==
          "17aeaf7d1a9aec640938989d5150e668f65a91c7a1edaded9297c7d56667db54");
}

TEST_CASE("full context prompt renders every attribute and the emotion") {
    const auto space = persona::build_attribute_space();
    const auto spec =
        build_prompt(space, PromptType::FullContext, reference_persona(space), emotions::label_by_id(18), question());
    const auto& sys = spec.system_message;
    CHECK(sys.rfind("You are a 34-year-old Female Engineer.\n", 0) == 0);
    CHECK(sys.find("Cultural Background: Eastern\n") != std::string::npos);
    CHECK(sys.find("Problem-solving Approach: Creative\n") != std::string::npos);
    CHECK(sys.find("Age:") == std::string::npos);
    CHECK(sys.find("You are currently feeling love.") != std::string::npos);
    CHECK(spec.user_message == question());
    CHECK(rendered_text(spec) == sys + "\n\n" + question());
}

TEST_CASE("component mismatches are rejected") {
    const auto space = persona::build_attribute_space();
    const auto p = reference_persona(space);
    const auto joy = emotions::label_by_name("joy");
    auto expect_mismatch = [](auto&& f) {
        try {
            f();
            FAIL("expected ComponentMismatch");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::ComponentMismatch);
        }
    };
    expect_mismatch([&] { build_prompt(space, PromptType::Base, p, std::nullopt, question()); });
    expect_mismatch([&] { build_prompt(space, PromptType::Base, std::nullopt, joy, question()); });
    expect_mismatch([&] { build_prompt(space, PromptType::EmotionalOnly, p, joy, question()); });
    expect_mismatch([&] { build_prompt(space, PromptType::AttributesOnly, p, joy, question()); });
    expect_mismatch([&] { build_prompt(space, PromptType::FullContext, p, std::nullopt, question()); });
    CHECK_THROWS_AS(build_prompt(space, PromptType::Base, std::nullopt, std::nullopt, ""), Error);
}

TEST_CASE("base replicates share text but not hashes") {
    const auto space = persona::build_attribute_space();
    std::set<std::string> hashes;
    for (std::uint32_t r = 0; r < 3; ++r) {
        const auto spec = build_prompt(space, PromptType::Base, std::nullopt, std::nullopt, question(), r);
        CHECK(rendered_text(spec) == question());
        hashes.insert(spec.prompt_hash);
    }
    CHECK(hashes.size() == 3);
}

TEST_CASE("prompt type names round-trip") {
    for (auto t : kAllPromptTypes) CHECK(prompt_type_from_string(to_string(t)) == t);
    CHECK_THROWS_AS(prompt_type_from_string("everything"), Error);
}

TEST_CASE("emotional-only prompt carries the emotion and no attributes") {
    const auto space = persona::build_attribute_space();
    const auto spec =
        build_prompt(space, PromptType::EmotionalOnly, std::nullopt, emotions::label_by_name("joy"), question());
    CHECK(spec.system_message.empty());
    CHECK(spec.user_message.find("feeling joy") != std::string::npos);
    CHECK(spec.user_message.size() > question().size());
    CHECK(spec.user_message.compare(spec.user_message.size() - question().size(), question().size(), question()) == 0);
    for (const auto& attribute : space.attributes()) {
        CHECK(spec.user_message.find(attribute.name + ":") == std::string::npos);
    }
}

TEST_CASE("base prompt is the question alone") {
    const auto space = persona::build_attribute_space();
    const auto spec = build_prompt(space, PromptType::Base, std::nullopt, std::nullopt, question());
    CHECK(spec.system_message.empty());
    CHECK(spec.user_message == question());
}

TEST_CASE("full context keeps the component order") {
    const auto space = persona::build_attribute_space();
    const auto text = rendered_text(build_prompt(space, PromptType::FullContext, reference_persona(space),
                                                 emotions::label_by_name("gratitude"), question()));
    const auto role = text.find("You are a 34-year-old");
    const auto attrs = text.find("Personality Traits: Innovative");
    const auto emotion = text.find("feeling gratitude");
    const auto q = text.find(question());
    CHECK(role == 0);
    CHECK(role < attrs);
    CHECK(attrs < emotion);
    CHECK(emotion < q);
}
