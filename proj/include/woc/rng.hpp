#pragma once

#include <cstdint>
#include <initializer_list>

namespace woc {

// Portable seeded generator (xoshiro256** seeded through splitmix64). The
// standard library distributions are implementation-defined, so every draw
// that feeds a persisted or tested result goes through this type instead.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed);
    // Independent stream keyed by several integers, e.g. (seed, k, trial).
    static Rng stream(std::initializer_list<std::uint64_t> keys);

    std::uint64_t next();
    result_type operator()() { return next(); }
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }

    // Unbiased integer in [0, bound); bound must be > 0.
    std::uint64_t below(std::uint64_t bound);
    // Uniform double in the open interval (0, 1).
    double unit_open();

private:
    std::uint64_t s_[4];
};

std::uint64_t splitmix64(std::uint64_t& state);

// Maps a 64-bit word onto (0, 1) with 52 bits of precision; both ends stay exclusive.
double word_to_unit_open(std::uint64_t word);

}  // namespace woc
