#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace ringsig {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// FNV-1a, used to turn stream names into 64-bit tags.
constexpr std::uint64_t fnv1a64(std::string_view text) noexcept
{
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

constexpr std::uint64_t hash_words(std::initializer_list<std::uint64_t> words) noexcept
{
    std::uint64_t h = 0x6A09E667F3BCC909ULL;
    for (auto w : words)
        h = mix64(h ^ mix64(w));
    return h;
}

/// Counter-based generator: the k-th draw of a named stream is a pure
/// function of (seed, stream, k), so any index range can be regenerated
/// independently by the transmitter, the receiver or a worker thread.
class CounterStream
{
public:
    constexpr CounterStream(std::uint64_t seed, std::string_view stream) noexcept
        : key_(mix64(seed ^ mix64(fnv1a64(stream))))
    {
    }

    constexpr std::uint64_t bits(std::uint64_t k) const noexcept
    {
        return mix64(key_ ^ mix64(k + 0xD1B54A32D192ED03ULL));
    }

    // Uniform on [0, 1) with 53 bits of resolution.
    constexpr double uniform(std::uint64_t k) const noexcept
    {
        return static_cast<double>(bits(k) >> 11) * 0x1.0p-53;
    }

private:
    std::uint64_t key_;
};

} // namespace ringsig
