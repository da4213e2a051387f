#pragma once

#include <cstdint>

namespace pvim {

/// Counter-based generator keyed by (seed, stream).
///
/// Draw i of stream s under seed k is
///   mix64(key + (i + 1) * 0x9E3779B97F4A7C15),  key = mix64(k ^ mix64(s + 0xD1B54A32D192ED03))
/// where mix64 is the SplitMix64 finalizer. The stream is bit-exact across
/// platforms and independent streams never share state, so replication r of a
/// Monte Carlo loop can be given stream r without any coordination.
class SeededRng {
public:
    SeededRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
        : key_(mix64(seed ^ mix64(stream + 0xD1B54A32D192ED03ULL))) {}

    std::uint64_t next_u64() noexcept {
        ++counter_;
        return mix64(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
    }

    /// Uniform on the open interval (0, 1); never returns 0 or 1.
    double uniform() noexcept {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    std::uint64_t counter() const noexcept { return counter_; }

    static constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace pvim
