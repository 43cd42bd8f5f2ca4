#pragma once

#include <cstdint>
#include <random>

namespace sst {

// splitmix64 finalizer; used to derive independent streams from (seed, tags).
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

using Rng = std::mt19937_64;

// Deterministic sub-stream for (seed, stage, index). Parallel replicate b and
// serial replicate b see the same stream, so worker count never changes results.
inline Rng make_stream(std::uint64_t seed, std::uint64_t stage, std::uint64_t index) {
    std::uint64_t s = mix64(seed);
    s = mix64(s ^ mix64(stage + 0x1000));
    s = mix64(s ^ mix64(index + 0x2000));
    return Rng(s);
}

}  // namespace sst
