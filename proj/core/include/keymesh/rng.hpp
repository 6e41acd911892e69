#pragma once

#include <cstdint>

namespace keymesh {

// SplitMix64. Small, fast, and identical output on every platform, which is
// what the byte-stable CSV contract needs; std:: distributions are not
// portable across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double next_double() {
        return double(next_u64() >> 11) * 0x1.0p-53;
    }

    // Unbiased uniform in [0, n) by rejection.
    std::uint64_t next_below(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) {
                return r % n;
            }
        }
    }

private:
    std::uint64_t state_;
};

// Decorrelated stream seed for a named sub-purpose of a trial seed.
inline std::uint64_t substream_seed(std::uint64_t base, std::uint64_t stream) {
    Rng r(base ^ (stream * 0xd1b54a32d192ed03ULL));
    return r.next_u64();
}

} // namespace keymesh
