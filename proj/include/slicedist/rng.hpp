#pragma once

#include <cstdint>
#include <random>

namespace slicedist {

// splitmix64 finalizer, used to mix seeds for derived streams.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// A seeded random stream. Substreams are derived deterministically from a
// master seed and a stream index, so independent components (direction
// sampling, data sampling, permutations) stay decoupled: consuming more
// draws in one stream never shifts another.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : gen_(seed) {}

    static RngStream substream(std::uint64_t master_seed, std::uint64_t stream_id,
                               std::uint64_t index = 0) {
        return RngStream(mix64(mix64(master_seed ^ mix64(stream_id)) ^ mix64(index)));
    }

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(gen_); }

    double normal() { return std::normal_distribution<double>(0.0, 1.0)(gen_); }

    // Uniform integer in [0, bound).
    std::uint64_t uniform_int(std::uint64_t bound) {
        return std::uniform_int_distribution<std::uint64_t>(0, bound - 1)(gen_);
    }

    std::mt19937_64& generator() { return gen_; }

private:
    std::mt19937_64 gen_;
};

} // namespace slicedist
