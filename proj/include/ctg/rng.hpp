#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace ctg {

// SplitMix64 finalizer. Fixed published constants, so every value derived
// from it is identical on every platform and compiler.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ull;

// Child seed for (master, tag): mix64(master + (tag + 1) * kGoldenGamma).
// Pure and order-independent; derive_seed(0, 0) == 0xE220A8397B1DCDAF.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag) {
    return mix64(master + kGoldenGamma * (tag + 1));
}

// FNV-1a hash of a label, used as a stable named tag for derive_seed.
constexpr std::uint64_t seed_tag(const char* label) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (; *label; ++label) {
        h ^= static_cast<unsigned char>(*label);
        h *= 0x100000001b3ull;
    }
    return h;
}

// SplitMix64 stream generator.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return mix64(state_ += kGoldenGamma); }

    // Uniform in [0, 1), 53 mantissa bits.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double next_in(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    // Uniform index in [0, n) via 128-bit multiply-shift.
    std::size_t next_below(std::size_t n) {
        return static_cast<std::size_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    // In-place Fisher-Yates shuffle.
    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = next_below(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
};

}  // namespace ctg
