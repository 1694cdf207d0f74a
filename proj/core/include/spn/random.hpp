#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace spn {

// FNV-1a; stable across platforms, used to derive sub-stream ids from labels.
constexpr std::uint64_t stable_hash(std::string_view label) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char ch : label) {
        h ^= static_cast<std::uint8_t>(ch);
        h *= 0x100000001b3ULL;
    }
    return h;
}

// mt19937_64 with hand-rolled transforms. std:: distributions are
// implementation-defined, which would break byte-identical artifacts across
// standard libraries.
class Rng {
public:
    Rng() : Rng(0, "default") {}
    Rng(std::uint64_t seed, std::string_view stream) {
        const std::uint64_t id = stable_hash(stream);
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(id), static_cast<std::uint32_t>(id >> 32)};
        engine_.seed(seq);
    }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool bernoulli(double p) {
        if (p <= 0.0) return false;
        if (p >= 1.0) return true;
        return uniform() < p;
    }

    double exponential(double mean) { return -mean * std::log1p(-uniform()); }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace spn
