#pragma once

#include "ringsig/modem.hpp"
#include "ringsig/shaping.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ringsig {

struct FrameSpec {
    std::size_t header_symbols = 12;
    std::size_t data_bits = 10000;
    std::string message = "hello world ###";

    void validate() const;
};

/// Header and data are generated separately: the header is a fixed antipodal
/// sequence that never goes through shaping, so its length and position are
/// independent of the modulation order and of I_p.
struct Frame {
    std::vector<IqSample> header;
    std::vector<IqSample> data;
    Bits payload_bits; // zero-padded to a whole number of data symbols

    std::vector<IqSample> symbols() const;
    std::size_t size() const noexcept { return header.size() + data.size(); }
};

/// +/-1 chip pattern of the header. Twelve chips use the canonical pattern;
/// other lengths (4..127) use a searched low-sidelobe pattern.
std::vector<int> header_pattern(std::size_t length);

std::vector<IqSample> build_header(const FrameSpec& spec, double amplitude);

/// data_bits rounded up to a multiple of the scheme's bits per symbol.
std::size_t padded_data_bits(const FrameSpec& spec, Scheme scheme);

std::size_t data_symbol_count(const FrameSpec& spec, Scheme scheme);

std::size_t frame_symbol_count(const FrameSpec& spec, Scheme scheme);

/// Message bytes unpacked MSB first, repeated cyclically, truncated.
Bits expand_message_to_bits(std::string_view message, std::size_t data_bits);

/// Data symbol k of the frame uses factor index k of the shaping streams.
Frame build_frame(std::span<const std::uint8_t> bits, const FrameSpec& spec,
                  const ModConfig& mod, const ShapingConfig& shaping);

} // namespace ringsig
