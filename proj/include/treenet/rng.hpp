#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace treenet {

// Deterministic random stream identified by (master seed, stream index).
//
// The engine is std::mt19937_64 seeded through std::seed_seq, both of which
// are fully specified by the standard, so a stream produces the same draws
// on every conforming platform. Conversions to doubles and bounded integers
// are done here rather than through <random> distributions, whose output is
// implementation-defined.
class RngStream {
public:
    using result_type = std::uint64_t;

    RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
        : seed_(master_seed), stream_(stream_index), engine_(make_engine(master_seed, stream_index)) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() { return engine_(); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, bound), bound > 0 (multiply-shift reduction).
    std::uint64_t below(std::uint64_t bound) {
        __extension__ using wide_t = unsigned __int128;
        const wide_t wide = static_cast<wide_t>(engine_()) * bound;
        return static_cast<std::uint64_t>(wide >> 64);
    }

    std::uint64_t master_seed() const { return seed_; }
    std::uint64_t stream_index() const { return stream_; }

private:
    static std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                          0x7472u};
        return std::mt19937_64(seq);
    }

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::mt19937_64 engine_;
};

// SplitMix64 finalizer; used to derive sub-seeds such as one master seed per
// tree depth in a sweep.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (tag + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace treenet
