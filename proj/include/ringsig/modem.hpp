#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace ringsig {

using IqSample = std::complex<double>;
using SymbolIndex = std::uint32_t;
using Bits = std::vector<std::uint8_t>;

enum class Scheme : std::uint8_t {
    Bpsk,
    Qpsk,
    Psk8,
    Psk16,
    Psk32,
    Psk64,
    Qam8,
    Qam16,
    Qam32,
    Qam64,
};

inline constexpr std::size_t kSchemeCount = 10;

inline constexpr std::array<Scheme, kSchemeCount> kAllSchemes = {
    Scheme::Bpsk,  Scheme::Qpsk,  Scheme::Psk8,  Scheme::Psk16, Scheme::Psk32,
    Scheme::Psk64, Scheme::Qam8,  Scheme::Qam16, Scheme::Qam32, Scheme::Qam64,
};

constexpr std::size_t scheme_slot(Scheme s) noexcept { return static_cast<std::size_t>(s); }

constexpr unsigned order(Scheme s) noexcept
{
    constexpr std::array<unsigned, kSchemeCount> orders = {2, 4, 8, 16, 32, 64, 8, 16, 32, 64};
    return orders[scheme_slot(s)];
}

constexpr unsigned bits_per_symbol(Scheme s) noexcept
{
    unsigned m = order(s), b = 0;
    while (m > 1) {
        m >>= 1;
        ++b;
    }
    return b;
}

constexpr bool is_psk(Scheme s) noexcept { return s <= Scheme::Psk64; }

std::string_view to_string(Scheme s) noexcept;
std::optional<Scheme> parse_scheme(std::string_view name) noexcept;

/// PSK scheme of the given order (2..64); throws DomainError otherwise.
Scheme psk_of_order(unsigned m);

struct ModConfig {
    Scheme scheme = Scheme::Qpsk;
    double amplitude = 1.0;

    void validate() const;
};

constexpr unsigned gray_encode(unsigned v) noexcept { return v ^ (v >> 1); }

constexpr unsigned gray_decode(unsigned g) noexcept
{
    unsigned v = g;
    for (unsigned shift = 1; shift < 32; shift <<= 1)
        v ^= v >> shift;
    return v;
}

/// Ideal constellation points. PSK point k sits at angle 2*pi*k/M with
/// magnitude `amplitude`; QAM grids are scaled to average power amplitude^2.
std::vector<IqSample> constellation(Scheme s, double amplitude = 1.0);

/// Groups bits big-endian per symbol. Position k on the PSK circle carries the
/// label gray_encode(k), so adjacent angles differ in one bit.
std::vector<SymbolIndex> bits_to_symbol_indices(std::span<const std::uint8_t> bits, Scheme s);

Bits symbol_indices_to_bits(std::span<const SymbolIndex> indices, Scheme s);

std::vector<IqSample> modulate(std::span<const SymbolIndex> indices, const ModConfig& cfg);

/// Nearest-point decisions; exact ties go to the lowest index.
std::vector<SymbolIndex> demodulate(std::span<const IqSample> samples, const ModConfig& cfg);

} // namespace ringsig
