#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace woc {

using Sha256Digest = std::array<std::uint8_t, 32>;

Sha256Digest sha256(std::string_view data);
std::string to_hex(const Sha256Digest& digest);
std::string sha256_hex(std::string_view data);

// First eight digest bytes read big-endian; stable across platforms.
std::uint64_t digest_word(const Sha256Digest& digest, std::size_t index);

// Appends "<byte length>:<bytes>;" so concatenated fields hash injectively.
void append_field(std::string& preimage, std::string_view field);

}  // namespace woc
