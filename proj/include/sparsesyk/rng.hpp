// rng.hpp: seeded random streams with order-independent fan-out

#pragma once

#include <cstdint>
#include <random>

namespace ssyk {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to decorrelate (master, index) pairs.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) noexcept
{
    return mix64(mix64(master) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

// Independent stream for realization `index` of an ensemble seeded by `master`.
// Streams do not depend on the order in which realizations are evaluated.
inline Rng make_stream(std::uint64_t master, std::uint64_t index)
{
    return Rng(stream_seed(master, index));
}

inline Rng make_stream(std::uint64_t master, std::uint64_t index, std::uint64_t sub)
{
    return Rng(stream_seed(stream_seed(master, index), sub));
}

} // namespace ssyk
