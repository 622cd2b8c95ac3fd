#ifndef RNLS_RNG_HPP
#define RNLS_RNG_HPP

#include <cstdint>
#include <random>

namespace rnls {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Counter-based seed derivation: every stochastic draw stream is identified
// by (master seed, stream id, counter), so parallel execution order cannot
// change the draws.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                 std::uint64_t counter = 0) {
    return splitmix64(splitmix64(master ^ (0x517cc1b727220a95ULL * stream)) + counter);
}

inline std::mt19937_64 make_rng(std::uint64_t master, std::uint64_t stream,
                                std::uint64_t counter = 0) {
    return std::mt19937_64(derive_seed(master, stream, counter));
}

}  // namespace rnls

#endif
