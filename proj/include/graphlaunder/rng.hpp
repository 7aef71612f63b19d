#pragma once

#include <cstdint>
#include <random>

namespace graphlaunder {

// SplitMix64 finalizer; used to derive independent RNG streams from a user
// seed plus structural indices (node, walk, tree, fold, ...) so results do
// not depend on scheduling or worker count.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ splitmix64(b ^ 0x6a09e667f3bcc909ULL));
}

template <typename... Rest>
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, Rest... rest) {
    return mix_seed(mix_seed(a, b), static_cast<std::uint64_t>(rest)...);
}

inline std::mt19937_64 make_rng(std::uint64_t seed) {
    return std::mt19937_64(splitmix64(seed));
}

// Fisher-Yates prefix shuffle: after the call, items[0..k) is a uniform
// sample without replacement of the whole vector.
template <typename T>
void partial_shuffle(std::vector<T>& items, std::size_t k, std::mt19937_64& rng) {
    const std::size_t n = items.size();
    if (n == 0) return;
    k = std::min(k, n - 1);
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(items[i], items[pick(rng)]);
    }
}

} // namespace graphlaunder
