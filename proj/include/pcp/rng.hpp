#pragma once

#include <cstdint>

namespace pcp {

// splitmix64 finalizer; used to derive independent stream seeds from the run seed.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

enum class Stream : std::uint64_t {
    Bank = 1,
    Encoder = 2,
    Shuffle = 3,
    KMeans = 4,
    EvalKMeans = 5,
    PairSampling = 6,
    Probe = 7,
    Data = 8,
};

constexpr std::uint64_t derive_seed(std::uint64_t base, Stream stream, std::uint64_t index = 0) {
    return mix_seed(mix_seed(base ^ (static_cast<std::uint64_t>(stream) << 56)) + index);
}

} // namespace pcp
