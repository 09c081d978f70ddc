// Seeded hash lanes. One published mixer (MurmurHash64A, Austin Appleby,
// public domain) instantiated per seed stands in for the per-purpose custom
// hash functions of a programmable pipeline.
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "dpids/error.hpp"
#include "dpids/op_budget.hpp"

namespace dpids {

inline std::uint64_t murmur64a(std::span<const std::uint8_t> data,
                               std::uint64_t seed) {
    constexpr std::uint64_t m = 0xc6a4a7935bd1e995ull;
    constexpr int r = 47;

    std::uint64_t h = seed ^ (static_cast<std::uint64_t>(data.size()) * m);

    std::size_t i = 0;
    for (; i + 8 <= data.size(); i += 8) {
        std::uint64_t k = 0;
        for (int b = 7; b >= 0; --b) {
            k = (k << 8) | data[i + static_cast<std::size_t>(b)];
        }
        k *= m;
        k ^= k >> r;
        k *= m;
        h ^= k;
        h *= m;
    }

    switch (data.size() - i) {
        case 7: h ^= static_cast<std::uint64_t>(data[i + 6]) << 48; [[fallthrough]];
        case 6: h ^= static_cast<std::uint64_t>(data[i + 5]) << 40; [[fallthrough]];
        case 5: h ^= static_cast<std::uint64_t>(data[i + 4]) << 32; [[fallthrough]];
        case 4: h ^= static_cast<std::uint64_t>(data[i + 3]) << 24; [[fallthrough]];
        case 3: h ^= static_cast<std::uint64_t>(data[i + 2]) << 16; [[fallthrough]];
        case 2: h ^= static_cast<std::uint64_t>(data[i + 1]) << 8;  [[fallthrough]];
        case 1: h ^= static_cast<std::uint64_t>(data[i]);
                h *= m;
                break;
        default: break;
    }

    h ^= h >> r;
    h *= m;
    h ^= h >> r;
    return h;
}

// One hash-engine invocation: maps (bytes, seed) into [0, modulus).
// Deterministic for a given input pair. Charges one op when a budget is given.
inline std::uint64_t hash_lane(std::span<const std::uint8_t> bytes,
                               std::uint64_t seed, std::uint64_t modulus,
                               OpBudget* budget = nullptr) {
    if (modulus == 0) {
        throw ArgumentError("hash_lane: modulus must be >= 1");
    }
    if (budget != nullptr) {
        budget->charge();
    }
    return murmur64a(bytes, seed) % modulus;
}

// Convenience lane over a 32-bit key (big-endian byte order).
inline std::uint64_t hash_lane_u32(std::uint32_t key, std::uint64_t seed,
                                   std::uint64_t modulus,
                                   OpBudget* budget = nullptr) {
    const std::uint8_t bytes[4] = {
        static_cast<std::uint8_t>(key >> 24), static_cast<std::uint8_t>(key >> 16),
        static_cast<std::uint8_t>(key >> 8), static_cast<std::uint8_t>(key)};
    return hash_lane(std::span<const std::uint8_t>(bytes, 4), seed, modulus, budget);
}

// splitmix64 finalizer; used to derive per-row seeds from one master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t lane) {
    std::uint64_t z = master + 0x9e3779b97f4a7c15ull * (lane + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace dpids
