#include "ringsig/modem.hpp"

#include "ringsig/error.hpp"

#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace ringsig {

namespace {

constexpr std::array<std::string_view, kSchemeCount> kNames = {
    "BPSK", "QPSK", "8PSK", "16PSK", "32PSK", "64PSK", "8QAM", "16QAM", "32QAM", "64QAM",
};

// Rectangular/square/cross integer grids before power normalization.
std::vector<IqSample> qam_grid(Scheme s)
{
    std::vector<IqSample> pts;
    switch (s) {
    case Scheme::Qam8:
        for (int q : {-1, 1})
            for (int i : {-3, -1, 1, 3})
                pts.emplace_back(i, q);
        break;
    case Scheme::Qam16:
    case Scheme::Qam64: {
        const int side = s == Scheme::Qam16 ? 4 : 8;
        for (int q = 0; q < side; ++q)
            for (int i = 0; i < side; ++i)
                pts.emplace_back(2 * i - side + 1, 2 * q - side + 1);
        break;
    }
    case Scheme::Qam32:
        // 6x6 grid minus the four corners.
        for (int q = 0; q < 6; ++q)
            for (int i = 0; i < 6; ++i) {
                const bool corner = (i == 0 || i == 5) && (q == 0 || q == 5);
                if (!corner)
                    pts.emplace_back(2 * i - 5, 2 * q - 5);
            }
        break;
    default:
        break;
    }
    return pts;
}

void check_indices(std::span<const SymbolIndex> indices, unsigned m)
{
    for (std::size_t k = 0; k < indices.size(); ++k)
        if (indices[k] >= m)
            throw Error(ErrorCode::IndexOutOfRange,
                        "symbol index " + std::to_string(indices[k]) + " at position " +
                            std::to_string(k) + " exceeds order " + std::to_string(m));
}

} // namespace

std::string_view to_string(Scheme s) noexcept { return kNames[scheme_slot(s)]; }

std::optional<Scheme> parse_scheme(std::string_view name) noexcept
{
    for (auto s : kAllSchemes) {
        const auto ref = kNames[scheme_slot(s)];
        if (ref.size() != name.size())
            continue;
        bool eq = true;
        for (std::size_t i = 0; i < ref.size() && eq; ++i)
            eq = std::toupper(static_cast<unsigned char>(name[i])) == ref[i];
        if (eq)
            return s;
    }
    return std::nullopt;
}

Scheme psk_of_order(unsigned m)
{
    for (auto s : kAllSchemes)
        if (is_psk(s) && order(s) == m)
            return s;
    throw Error(ErrorCode::DomainError, "no PSK scheme of order " + std::to_string(m));
}

void ModConfig::validate() const
{
    if (!(amplitude > 0.0) || !std::isfinite(amplitude))
        throw Error(ErrorCode::DomainError, "amplitude must be positive and finite");
}

std::vector<IqSample> constellation(Scheme s, double amplitude)
{
    const unsigned m = order(s);
    if (is_psk(s)) {
        std::vector<IqSample> pts(m);
        for (unsigned k = 0; k < m; ++k) {
            const double phi = 2.0 * std::numbers::pi * k / m;
            pts[k] = amplitude * IqSample(std::cos(phi), std::sin(phi));
        }
        return pts;
    }
    auto pts = qam_grid(s);
    double power = 0.0;
    for (auto p : pts)
        power += std::norm(p);
    const double scale = amplitude / std::sqrt(power / pts.size());
    for (auto& p : pts)
        p *= scale;
    return pts;
}

std::vector<SymbolIndex> bits_to_symbol_indices(std::span<const std::uint8_t> bits, Scheme s)
{
    const unsigned bps = bits_per_symbol(s);
    if (bits.size() % bps != 0)
        throw Error(ErrorCode::LengthNotDivisible,
                    std::to_string(bits.size()) + " bits is not a multiple of " + std::to_string(bps));
    std::vector<SymbolIndex> out(bits.size() / bps);
    for (std::size_t k = 0; k < out.size(); ++k) {
        unsigned value = 0;
        for (unsigned b = 0; b < bps; ++b)
            value = (value << 1) | (bits[k * bps + b] & 1U);
        out[k] = gray_decode(value);
    }
    return out;
}

Bits symbol_indices_to_bits(std::span<const SymbolIndex> indices, Scheme s)
{
    const unsigned bps = bits_per_symbol(s);
    check_indices(indices, order(s));
    Bits out(indices.size() * bps);
    for (std::size_t k = 0; k < indices.size(); ++k) {
        const unsigned value = gray_encode(indices[k]);
        for (unsigned b = 0; b < bps; ++b)
            out[k * bps + b] = static_cast<std::uint8_t>((value >> (bps - 1 - b)) & 1U);
    }
    return out;
}

std::vector<IqSample> modulate(std::span<const SymbolIndex> indices, const ModConfig& cfg)
{
    cfg.validate();
    const auto pts = constellation(cfg.scheme, cfg.amplitude);
    check_indices(indices, static_cast<unsigned>(pts.size()));
    std::vector<IqSample> out(indices.size());
    for (std::size_t k = 0; k < indices.size(); ++k)
        out[k] = pts[indices[k]];
    return out;
}

std::vector<SymbolIndex> demodulate(std::span<const IqSample> samples, const ModConfig& cfg)
{
    cfg.validate();
    const auto pts = constellation(cfg.scheme, cfg.amplitude);
    // Distances within this relative margin count as ties.
    constexpr double tie_eps = 1e-12;
    std::vector<SymbolIndex> out(samples.size());
    for (std::size_t k = 0; k < samples.size(); ++k) {
        double best = std::norm(samples[k] - pts[0]);
        SymbolIndex arg = 0;
        for (SymbolIndex i = 1; i < pts.size(); ++i) {
            const double d = std::norm(samples[k] - pts[i]);
            if (d < best - tie_eps * (best + cfg.amplitude * cfg.amplitude)) {
                best = d;
                arg = i;
            }
        }
        out[k] = arg;
    }
    return out;
}

} // namespace ringsig
