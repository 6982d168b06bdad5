#pragma once

#include "ringsig/framing.hpp"
#include "ringsig/modem.hpp"
#include "ringsig/shaping.hpp"

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace ringsig {

inline constexpr std::size_t kMinFreqEstimateSamples = 512;

struct SyncConfig {
    unsigned effective_order = 4;     // M_eff of the shaped constellation
    double pll_loop_bandwidth = 0.01; // normalized to the symbol rate
    double pll_damping = 0.70710678118654752;
    double detect_threshold = 0.6;    // squared normalized correlation
    unsigned fft_oversample = 8;
    bool estimate_cfo = true;         // run the M_eff-power frequency estimator
    bool track_phase = true;          // run the PLL over the frame

    void validate() const;
};

struct SyncResult {
    std::size_t frame_start = 0;
    double cfo_estimate = 0.0;   // cycles per symbol
    double phase_estimate = 0.0; // radians, from the header correlation
    double correlation_peak = 0.0;
};

/// Size of the PSK angle set occupied by `scheme` rotated on a 2^I_p grid.
unsigned effective_order(Scheme scheme, int phase_intensity);

/// Raises the unit-magnitude samples to the M_eff power, locates the peak
/// of an oversampled DFT and divides by M_eff. Offsets beyond
/// 1/(2*M_eff) alias silently.
double estimate_freq_offset(std::span<const IqSample> samples, const SyncConfig& cfg);

/// Multiplies sample k by exp(-j*(2*pi*cfo*k + phase)).
std::vector<IqSample> derotate(std::span<const IqSample> samples, double cfo, double phase = 0.0);

struct PllOutput {
    std::vector<IqSample> samples;
    std::vector<double> phase; // NCO phase applied to each sample
};

/// Second-order decision-directed carrier loop. The phase detector slices
/// onto the M_eff-PSK angle grid, so lock is ambiguous by 2*pi/M_eff.
PllOutput carrier_sync_pll(std::span<const IqSample> samples, const SyncConfig& cfg,
                           double initial_phase = 0.0);

/// Mean absolute angle between each sample and the nearest point of the
/// `order`-PSK grid, over samples [skip, end).
double mean_grid_phase_error(std::span<const IqSample> samples, unsigned order, std::size_t skip = 0);

/// Slides the known header over lags [0, max_lag] and picks the lag with the
/// largest squared normalized correlation |<h, y>|^2 / (|h|^2 |y|^2).
SyncResult frame_detect(std::span<const IqSample> samples, std::span<const IqSample> header,
                        double threshold,
                        std::size_t max_lag = std::numeric_limits<std::size_t>::max());

struct ReceiveStats {
    double evm_pre = 0.0;  // data region before factor removal, vs the M_eff grid
    double evm_post = 0.0; // after factor removal, vs the base constellation
    std::size_t bits_compared = 0;
    std::size_t bit_errors = 0;
    std::size_t symbols_compared = 0;
    std::size_t symbol_errors = 0;
};

struct Reception {
    Bits bits;
    std::vector<SymbolIndex> indices;
    SyncResult sync;
    ReceiveStats stats;
};

/// Receiver chain: frequency estimate, derotation, header search, header
/// phase correction, optional PLL, factor removal, data-aided phase
/// refinement on the base constellation, slicing and Gray decoding.
/// `reference_bits`, when given, fills the error counters in `stats`.
Reception receive_frame(std::span<const IqSample> samples, const ModConfig& mod,
                        const ShapingConfig& shaping, const FrameSpec& spec,
                        const SyncConfig& sync, std::span<const std::uint8_t> reference_bits = {});

} // namespace ringsig
