#pragma once

#include <cstdint>
#include <random>

namespace levylab {

using Engine = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

// Independent engine for a (seed, a, b, c) tuple. Streams for distinct
// tuples are decorrelated by splitmix hashing of every component.
Engine substream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                 std::uint64_t c = 0);

// Uniform on (0, 1].
double uniform_open_closed(Engine& eng);

// Stream tags, kept distinct so that every consumer owns its own engine.
namespace tag {
inline constexpr std::uint64_t shell = 0x5348454cULL;
inline constexpr std::uint64_t big_jumps = 0x42494721ULL;
inline constexpr std::uint64_t brownian = 0x42524f57ULL;
inline constexpr std::uint64_t support = 0x53555050ULL;
inline constexpr std::uint64_t fixture = 0x46495854ULL;
}  // namespace tag

}  // namespace levylab
