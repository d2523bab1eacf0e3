#include "woc/hashing.hpp"

#include <openssl/evp.h>

#include <stdexcept>

namespace woc {

Sha256Digest sha256(std::string_view data) {
    Sha256Digest out{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 ||
        len != out.size()) {
        throw std::runtime_error("sha256 digest failed");
    }
    return out;
}

std::string to_hex(const Sha256Digest& digest) {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string hex;
    hex.reserve(digest.size() * 2);
    for (std::uint8_t b : digest) {
        hex.push_back(kHex[b >> 4]);
        hex.push_back(kHex[b & 0x0f]);
    }
    return hex;
}

std::string sha256_hex(std::string_view data) { return to_hex(sha256(data)); }

std::uint64_t digest_word(const Sha256Digest& digest, std::size_t index) {
    std::uint64_t word = 0;
    for (std::size_t i = 0; i < 8; ++i) {
        word = (word << 8) | digest[(index % 4) * 8 + i];
    }
    return word;
}

void append_field(std::string& preimage, std::string_view field) {
    preimage += std::to_string(field.size());
    preimage += ':';
    preimage += field;
    preimage += ';';
}

}  // namespace woc
