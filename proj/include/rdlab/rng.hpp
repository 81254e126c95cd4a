#pragma once

#include "rdlab/common.hpp"

#include <cstdint>
#include <random>
#include <string_view>

namespace rdlab {

/// Deterministic seed splitting: one master seed, independent streams per
/// (task name, index). FNV-1a over the task string, then splitmix64.
inline std::uint64_t split_seed(std::uint64_t master, std::string_view task, std::uint64_t index = 0) {
    std::uint64_t h = 14695981039346656037ull;
    for (char c : task) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    std::uint64_t z = master ^ h ^ (index * 0x9e3779b97f4a7c15ull);
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::mt19937_64 make_rng(std::uint64_t master, std::string_view task, std::uint64_t index = 0) {
    return std::mt19937_64(split_seed(master, task, index));
}

/// Vector with i.i.d. uniform [-1,1] entries.
inline Vector random_vector(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = dist(rng);
    return v;
}

}  // namespace rdlab
