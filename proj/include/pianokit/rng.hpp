#pragma once

#include <cstdint>

namespace pianokit {

// Small deterministic generator (splitmix64). Unlike the standard library
// distributions, its output is identical on every platform, which keeps
// seeded experiments reproducible bit for bit.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in [lo, hi).
    double next_double(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    // Uniform integer in [lo, hi] (inclusive).
    int next_int(int lo, int hi) {
        return lo + static_cast<int>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
    }

    // Derives an independent stream, e.g. one per trial index.
    static SplitMix64 for_stream(std::uint64_t seed, std::uint64_t stream) {
        SplitMix64 mixer(seed ^ (stream * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL));
        return SplitMix64(mixer.next_u64());
    }

private:
    std::uint64_t state_;
};

} // namespace pianokit
