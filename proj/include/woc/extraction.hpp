#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <utility>

namespace woc::extraction {

inline constexpr double kMilesPerKilometer = 0.621371;

enum class Rule { UnitBearing, BareNumber, RangeMidpoint, None };

std::string_view to_string(Rule rule);

struct ExtractionResult {
    std::optional<double> miles;
    // Byte offsets [start, end) into the input text.
    std::optional<std::pair<std::size_t, std::size_t>> source_span;
    Rule rule = Rule::None;
};

// Priority: first unit-bearing range (midpoint), else first number with a
// distance unit within three tokens, else first bare number.
ExtractionResult extract_miles(std::string_view text);

}  // namespace woc::extraction
