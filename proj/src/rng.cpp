#include "cola/rng.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace cola {

namespace {
constexpr std::uint64_t k_golden_gamma = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t CounterRng::next_u64() {
    ++counter_;
    return mix64(seed_ + counter_ * k_golden_gamma);
}

double CounterRng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t CounterRng::below(std::uint64_t n) {
    if (n == 0) {
        throw std::invalid_argument("CounterRng::below: n must be positive");
    }
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
        const std::uint64_t x = next_u64();
        if (x >= threshold) {
            return x % n;
        }
    }
}

double CounterRng::normal() {
    // u1 in (0, 1] keeps the log finite.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view name) {
    return mix64(mix64(master) ^ fnv1a64(name));
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return mix64(mix64(master) + (index + 1) * k_golden_gamma);
}

std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count, CounterRng & rng) {
    if (count > n) {
        throw std::invalid_argument("sample_without_replacement: count exceeds population");
    }
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(count);
    return idx;
}

} // namespace cola
