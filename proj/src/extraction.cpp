#include "woc/extraction.hpp"

#include <algorithm>
#include <charconv>
#include <string>
#include <vector>

namespace woc::extraction {

namespace {

enum class TokenKind { Number, Word, Symbol };

struct Token {
    TokenKind kind;
    std::size_t start;
    std::size_t end;
    double value = 0.0;     // numbers
    std::string lower;      // words and symbols
};

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

std::size_t utf8_length(unsigned char lead) {
    if (lead < 0x80) return 1;
    if ((lead >> 5) == 0x6) return 2;
    if ((lead >> 4) == 0xe) return 3;
    if ((lead >> 3) == 0x1e) return 4;
    return 1;
}

std::size_t scan_number(std::string_view text, std::size_t pos, std::string& digits) {
    std::size_t i = pos;
    while (i < text.size() && is_digit(text[i])) {
        digits.push_back(text[i++]);
    }
    // Thousands groups: a comma followed by exactly three digits.
    while (i + 3 < text.size() && text[i] == ',' && is_digit(text[i + 1]) && is_digit(text[i + 2]) &&
           is_digit(text[i + 3]) && (i + 4 >= text.size() || !is_digit(text[i + 4]))) {
        digits.append(text.substr(i + 1, 3));
        i += 4;
    }
    if (i + 1 < text.size() && text[i] == '.' && is_digit(text[i + 1])) {
        digits.push_back('.');
        ++i;
        while (i < text.size() && is_digit(text[i])) {
            digits.push_back(text[i++]);
        }
    }
    return i;
}

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        const char c = text[i];
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f') {
            ++i;
        } else if (is_digit(c)) {
            std::string digits;
            const std::size_t end = scan_number(text, i, digits);
            Token token{TokenKind::Number, i, end, 0.0, {}};
            std::from_chars(digits.data(), digits.data() + digits.size(), token.value);
            tokens.push_back(std::move(token));
            i = end;
        } else if (is_alpha(c)) {
            std::size_t end = i;
            std::string lower;
            while (end < text.size() && is_alpha(text[end])) {
                lower.push_back(static_cast<char>(text[end] | 0x20));
                ++end;
            }
            tokens.push_back({TokenKind::Word, i, end, 0.0, std::move(lower)});
            i = end;
        } else {
            const std::size_t len = std::min(utf8_length(static_cast<unsigned char>(c)), text.size() - i);
            tokens.push_back({TokenKind::Symbol, i, i + len, 0.0, std::string(text.substr(i, len))});
            i += len;
        }
    }
    return tokens;
}

// Miles per unit, or 0 when the token is not a distance unit.
double unit_factor(const Token& token) {
    if (token.kind != TokenKind::Word) {
        return 0.0;
    }
    const auto& w = token.lower;
    if (w == "mi" || w == "mile" || w == "miles") {
        return 1.0;
    }
    if (w == "km" || w == "kms" || w == "kilometer" || w == "kilometers" || w == "kilometre" ||
        w == "kilometres") {
        return kMilesPerKilometer;
    }
    return 0.0;
}

struct UnitHit {
    double factor;
    std::size_t token;
};

// A unit within the next three tokens, not separated by another number.
std::optional<UnitHit> unit_after(const std::vector<Token>& tokens, std::size_t index) {
    for (std::size_t j = index + 1; j < tokens.size() && j <= index + 3; ++j) {
        if (tokens[j].kind == TokenKind::Number) {
            return std::nullopt;
        }
        if (const double f = unit_factor(tokens[j]); f > 0.0) {
            return UnitHit{f, j};
        }
    }
    return std::nullopt;
}

bool is_range_connector(const Token& token, bool after_between) {
    if (token.kind == TokenKind::Word) {
        return token.lower == "to" || (after_between && token.lower == "and");
    }
    // '-', en dash, em dash
    return token.lower == "-" || token.lower == "\xE2\x80\x93" || token.lower == "\xE2\x80\x94";
}

std::optional<ExtractionResult> match_range(const std::vector<Token>& tokens, std::size_t i) {
    const Token& first = tokens[i];
    if (first.kind != TokenKind::Number || first.value <= 0.0) {
        return std::nullopt;
    }
    const bool after_between = i > 0 && tokens[i - 1].kind == TokenKind::Word && tokens[i - 1].lower == "between";
    std::size_t j = i + 1;
    double first_factor = 0.0;
    if (j < tokens.size()) {
        first_factor = unit_factor(tokens[j]);
        if (first_factor > 0.0) {
            ++j;
        }
    }
    if (j >= tokens.size() || !is_range_connector(tokens[j], after_between)) {
        return std::nullopt;
    }
    ++j;
    if (j >= tokens.size() || tokens[j].kind != TokenKind::Number || tokens[j].value <= 0.0) {
        return std::nullopt;
    }
    const auto trailing = unit_after(tokens, j);
    if (!trailing) {
        return std::nullopt;
    }
    const double lo = first.value * (first_factor > 0.0 ? first_factor : trailing->factor);
    const double hi = tokens[j].value * trailing->factor;
    ExtractionResult result;
    result.miles = (lo + hi) / 2.0;
    result.source_span = std::make_pair(first.start, tokens[trailing->token].end);
    result.rule = Rule::RangeMidpoint;
    return result;
}

}  // namespace

std::string_view to_string(Rule rule) {
    switch (rule) {
        case Rule::UnitBearing: return "unit-bearing";
        case Rule::BareNumber: return "bare-number";
        case Rule::RangeMidpoint: return "range-midpoint";
        case Rule::None: return "none";
    }
    return "none";
}

ExtractionResult extract_miles(std::string_view text) {
    const auto tokens = tokenize(text);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (auto range = match_range(tokens, i)) {
            return *range;
        }
    }
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const Token& token = tokens[i];
        if (token.kind != TokenKind::Number || token.value <= 0.0) {
            continue;
        }
        if (const auto unit = unit_after(tokens, i)) {
            return {token.value * unit->factor, std::make_pair(token.start, tokens[unit->token].end),
                    Rule::UnitBearing};
        }
    }
    for (const Token& token : tokens) {
        if (token.kind == TokenKind::Number && token.value > 0.0) {
            return {token.value, std::make_pair(token.start, token.end), Rule::BareNumber};
        }
    }
    return {};
}

}  // namespace woc::extraction
