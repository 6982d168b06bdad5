#pragma once

#include "ringsig/modem.hpp"

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace ringsig {

struct ChannelConfig {
    double es_n0_db = std::numeric_limits<double>::infinity(); // +inf: noiseless
    double cfo = 0.0;          // cycles per symbol
    double phase_offset = 0.0; // radians
    std::uint64_t noise_seed = 0;

    void validate() const;
};

double db_to_linear(double db);
double linear_to_db(double ratio);

double mean_power(std::span<const IqSample> samples);

/// Per-complex-sample noise variance N0 = Es / (Es/N0), Es measured on the block.
double awgn_noise_variance(std::span<const IqSample> samples, double es_n0_db);

/// Adds circular complex Gaussian noise referenced to the measured block power.
std::vector<IqSample> apply_awgn(std::span<const IqSample> samples, const ChannelConfig& cfg);

/// Multiplies sample k by exp(j*(2*pi*cfo*k + phase_offset)).
std::vector<IqSample> apply_cfo(std::span<const IqSample> samples, const ChannelConfig& cfg);

/// Frequency/phase offset followed by AWGN.
std::vector<IqSample> apply_channel(std::span<const IqSample> samples, const ChannelConfig& cfg);

} // namespace ringsig
