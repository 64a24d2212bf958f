#pragma once

#include <cstdint>
#include <string_view>

namespace lpsr {

/// Counter-based generator: the i-th draw of a stream is a pure function of
/// (key, i), so any subrange can be evaluated independently and in any order.
/// Streams are split by hashing a tag into the key; no global state.
class CounterRng {
public:
    explicit constexpr CounterRng(std::uint64_t key) noexcept : key_(key) {}

    constexpr std::uint64_t key() const noexcept { return key_; }

    /// Raw 64 bits for counter position i.
    constexpr std::uint64_t bits(std::uint64_t i) const noexcept {
        return mix(key_ ^ mix(i + 0x9e3779b97f4a7c15ull));
    }

    /// Uniform in [0,1) with 53 bits of precision.
    double uniform(std::uint64_t i) const noexcept {
        return static_cast<double>(bits(i) >> 11) * 0x1.0p-53;
    }

    /// Uniform in [lo, hi).
    double uniform(std::uint64_t i, double lo, double hi) const noexcept {
        return lo + (hi - lo) * uniform(i);
    }

    /// Standard normal via Box-Muller; consumes counters 2i and 2i+1.
    double normal(std::uint64_t i) const noexcept;

    /// Independent child stream.
    constexpr CounterRng split(std::uint64_t tag) const noexcept {
        return CounterRng(mix(key_ + 0x632be59bd9b4e019ull * (tag + 1)));
    }
    CounterRng split(std::string_view tag) const noexcept;

    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t key_;
};

}  // namespace lpsr
