#pragma once

#include <cstdint>
#include <random>

namespace simsig {

/// splitmix64 finalizer; mixes seed words into well-separated engine states.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) { return mix64(mix64(a) ^ b); }

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix64(mix64(a, b) ^ c);
}

/// Engine for an independent stream identified by the seed words.
inline std::mt19937_64 make_engine(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
    return std::mt19937_64(mix64(a, b, c));
}

}  // namespace simsig
