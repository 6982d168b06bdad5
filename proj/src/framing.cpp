#include "ringsig/framing.hpp"

#include "ringsig/error.hpp"

#include "ringsig/random.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <limits>
#include <map>
#include <mutex>
#include <string>

namespace ringsig {

namespace {

constexpr std::array<int, 12> kCanonicalHeader = {+1, +1, +1, -1, -1, -1, +1, -1, -1, +1, -1, +1};

constexpr std::size_t kMaxHeader = 127;

int peak_sidelobe(const std::vector<int>& p)
{
    int worst = 0;
    for (std::size_t lag = 1; lag < p.size(); ++lag) {
        int c = 0;
        for (std::size_t k = 0; k + lag < p.size(); ++k)
            c += p[k] * p[k + lag];
        worst = std::max(worst, std::abs(c));
    }
    return worst;
}

// Lowest peak sidelobe found: exhaustive up to 16 chips, otherwise the best
// of a fixed set of pseudo-random candidates. Deterministic for each length.
std::vector<int> search_pattern(std::size_t length)
{
    std::vector<int> best, cand(length);
    int best_psl = std::numeric_limits<int>::max();
    const auto consider = [&] {
        const int psl = peak_sidelobe(cand);
        if (psl < best_psl) {
            best_psl = psl;
            best = cand;
        }
    };
    if (length <= 16) {
        for (std::uint32_t w = 0; w < (1U << length); ++w) {
            for (std::size_t k = 0; k < length; ++k)
                cand[k] = (w >> (length - 1 - k)) & 1U ? -1 : +1;
            consider();
        }
    } else {
        const CounterStream stream(length, "header");
        for (std::uint64_t t = 0; t < 4096; ++t) {
            for (std::size_t k = 0; k < length; ++k)
                cand[k] = stream.bits(t * kMaxHeader + k) >> 63 ? -1 : +1;
            consider();
        }
    }
    return best;
}

} // namespace

void FrameSpec::validate() const
{
    if (header_symbols < 4 || header_symbols > kMaxHeader)
        throw Error(ErrorCode::DomainError, "header length must lie in [4, 127]");
    if (message.empty())
        throw Error(ErrorCode::EmptyMessage, "frame message is empty");
}

std::vector<IqSample> Frame::symbols() const
{
    std::vector<IqSample> out;
    out.reserve(size());
    out.insert(out.end(), header.begin(), header.end());
    out.insert(out.end(), data.begin(), data.end());
    return out;
}

std::vector<int> header_pattern(std::size_t length)
{
    if (length == kCanonicalHeader.size())
        return {kCanonicalHeader.begin(), kCanonicalHeader.end()};
    if (length < 4 || length > kMaxHeader)
        throw Error(ErrorCode::DomainError, "header length must lie in [4, 127]");
    static std::mutex lock;
    static std::map<std::size_t, std::vector<int>> cache;
    const std::scoped_lock guard(lock);
    auto it = cache.find(length);
    if (it == cache.end())
        it = cache.emplace(length, search_pattern(length)).first;
    return it->second;
}

std::vector<IqSample> build_header(const FrameSpec& spec, double amplitude)
{
    if (!(amplitude > 0.0))
        throw Error(ErrorCode::DomainError, "amplitude must be positive");
    const auto chips = header_pattern(spec.header_symbols);
    std::vector<IqSample> out(chips.size());
    for (std::size_t k = 0; k < chips.size(); ++k)
        out[k] = IqSample(amplitude * chips[k], 0.0);
    return out;
}

std::size_t padded_data_bits(const FrameSpec& spec, Scheme scheme)
{
    const std::size_t bps = bits_per_symbol(scheme);
    return (spec.data_bits + bps - 1) / bps * bps;
}

std::size_t data_symbol_count(const FrameSpec& spec, Scheme scheme)
{
    return padded_data_bits(spec, scheme) / bits_per_symbol(scheme);
}

std::size_t frame_symbol_count(const FrameSpec& spec, Scheme scheme)
{
    return spec.header_symbols + data_symbol_count(spec, scheme);
}

Bits expand_message_to_bits(std::string_view message, std::size_t data_bits)
{
    if (message.empty())
        throw Error(ErrorCode::EmptyMessage, "message must contain at least one byte");
    Bits out(data_bits);
    for (std::size_t k = 0; k < data_bits; ++k) {
        const auto byte = static_cast<unsigned char>(message[(k / 8) % message.size()]);
        out[k] = static_cast<std::uint8_t>((byte >> (7 - k % 8)) & 1U);
    }
    return out;
}

Frame build_frame(std::span<const std::uint8_t> bits, const FrameSpec& spec, const ModConfig& mod,
                  const ShapingConfig& shaping)
{
    spec.validate();
    mod.validate();
    shaping.validate();
    if (!is_psk(mod.scheme))
        throw Error(ErrorCode::NotPsk, "only PSK schemes can be transmitted");
    if (bits.size() > spec.data_bits)
        throw Error(ErrorCode::PayloadTooLarge, std::to_string(bits.size()) + " bits exceed the " +
                                                    std::to_string(spec.data_bits) + "-bit data field");

    Frame frame;
    frame.payload_bits.assign(padded_data_bits(spec, mod.scheme), 0);
    std::copy(bits.begin(), bits.end(), frame.payload_bits.begin());

    const auto indices = bits_to_symbol_indices(frame.payload_bits, mod.scheme);
    const auto plain = modulate(indices, mod);
    frame.data = apply_shaping(plain, make_factor_stream(shaping, plain.size()));
    frame.header = build_header(spec, mod.amplitude);
    return frame;
}

} // namespace ringsig
