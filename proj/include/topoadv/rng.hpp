#pragma once

#include <cstdint>
#include <random>

namespace topoadv {

// splitmix64 finalizer; decorrelates nearby seeds.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Independent substream for work unit `index` of a master seed. Results
// derived from substreams do not depend on scheduling order.
inline std::mt19937_64 substream(std::uint64_t master_seed, std::uint64_t index) {
    return std::mt19937_64(mix64(mix64(master_seed) ^ mix64(index + 1)));
}

} // namespace topoadv
