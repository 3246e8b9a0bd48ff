#pragma once

#include <cstdint>

namespace markovnet {

// Deterministic 64-bit generator (splitmix64). Chosen over std:: engines so
// that streams and real-valued draws are identical on every platform and
// toolchain. Per-sample generators are split off a master seed by stream
// position, which makes dataset generation order-independent.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += kGamma;
        return finalize(state_);
    }

    // Uniform in [0,1) with 53-bit mantissa resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n). Modulo bias is < 2^-52 for the n used here.
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

    // Generator for stream position `index` of the stream rooted at `seed`.
    static Rng for_index(std::uint64_t seed, std::uint64_t index) {
        return Rng(finalize(seed) + index * kGamma);
    }

    static std::uint64_t finalize(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
    std::uint64_t state_;
};

}  // namespace markovnet
