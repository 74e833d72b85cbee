#include "levylab/rng.hpp"

namespace levylab {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Engine substream(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ splitmix64(a + 0x1234567ULL));
  h = splitmix64(h ^ splitmix64(b + 0x89abcdefULL));
  h = splitmix64(h ^ splitmix64(c + 0x13579bdfULL));
  std::seed_seq seq{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32),
                    static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(a)};
  return Engine(seq);
}

double uniform_open_closed(Engine& eng) {
  return 1.0 - static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

}  // namespace levylab
