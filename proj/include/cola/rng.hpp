#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace cola {

// SplitMix64 run as a counter stream: the i-th output (0-based) is
// mix64(seed + (i + 1) * 0x9E3779B97F4A7C15). Every derived draw below is
// defined on top of next_u64(), so a (seed, draw order) pair reproduces the
// same values on any platform with IEEE-754 doubles.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t next_u64();

    // Uniform in [0, 1) with 53 bits of resolution.
    double uniform();

    // Uniform integer in [0, n). n must be > 0. Rejection sampling, no modulo bias.
    std::uint64_t below(std::uint64_t n);

    // Standard normal via Box-Muller; consumes two u64 draws, uses the cosine branch only.
    double normal();

    std::uint64_t seed() const { return seed_; }
    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t z);

// 64-bit FNV-1a over raw bytes.
std::uint64_t fnv1a64(std::string_view bytes);

// Seed for a named stage or sub-stream of a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::string_view name);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

// First `count` entries of a seeded Fisher-Yates shuffle of [0, n).
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count, CounterRng & rng);

} // namespace cola
