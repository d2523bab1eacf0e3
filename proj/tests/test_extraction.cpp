#include <doctest.h>

#include <fstream>

#include <nlohmann/json.hpp>

#include "test_support.hpp"
#include "woc/extraction.hpp"

using namespace woc;
using namespace woc::extraction;

TEST_CASE("labeled corpus extracts exactly") {
    std::ifstream in(test::data_dir() / "extraction_corpus.jsonl");
    std::string line;
    int items = 0;
    while (std::getline(in, line)) {
        const auto item = nlohmann::json::parse(line);
        const auto text = item["text"].get<std::string>();
        const auto got = extract_miles(text);
        CAPTURE(text);
        CHECK(to_string(got.rule) == item["rule"].get<std::string>());
        if (item["miles"].is_null()) {
            CHECK_FALSE(got.miles);
            CHECK_FALSE(got.source_span);
        } else {
            REQUIRE(got.miles);
            CHECK(*got.miles == doctest::Approx(item["miles"].get<double>()).epsilon(1e-12));
        }
        ++items;
    }
    CHECK(items >= 25);
}

TEST_CASE("kilometre conversion") {
    const auto r = extract_miles("about 2,300 km");
    REQUIRE(r.miles);
    CHECK(*r.miles == doctest::Approx(1429.1533).epsilon(1e-9));
}

TEST_CASE("source span covers the number and its unit") {
    const std::string text = "It is roughly 1,426 miles away.";
    const auto r = extract_miles(text);
    REQUIRE(r.source_span);
    CHECK(text.substr(r.source_span->first, r.source_span->second - r.source_span->first) == "1,426 miles");
}

TEST_CASE("range span covers both ends") {
    const std::string text = "Maybe 1300 to 1500 miles.";
    const auto r = extract_miles(text);
    REQUIRE(r.source_span);
    CHECK(text.substr(r.source_span->first, r.source_span->second - r.source_span->first) == "1300 to 1500 miles");
}

TEST_CASE("units separated by another number do not attach") {
    const auto r = extract_miles("42 then 1400 miles");
    REQUIRE(r.miles);
    CHECK(*r.miles == 1400.0);
}
