#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace fk {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

// independent deterministic stream per (master seed, component label)
inline std::mt19937_64 seeded_engine(std::uint64_t master, std::string_view label) {
    return std::mt19937_64(splitmix64(master ^ fnv1a64(label)));
}

// uniform in [0,1) from the top 53 bits; no library distribution involved,
// so the stream is identical across standard library implementations
inline double u01(std::mt19937_64& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

} // namespace fk
