#include "ringsig/sync.hpp"

#include "complex_pow.hpp"
#include "ringsig/error.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>

namespace ringsig {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool is_power_of_two(unsigned v) { return v != 0 && (v & (v - 1)) == 0; }

unsigned log2_exact(unsigned v)
{
    unsigned b = 0;
    while ((1U << b) < v)
        ++b;
    return b;
}

// Angle between `angle` and the nearest multiple of 2*pi/order.
double grid_residual(double angle, unsigned order)
{
    const double step = kTwoPi / order;
    return angle - step * std::round(angle / step);
}

struct FftwPlanDeleter {
    void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};
using FftwPlan = std::unique_ptr<fftw_plan_s, FftwPlanDeleter>;

std::vector<IqSample> forward_fft(std::vector<IqSample> buffer)
{
    auto* data = reinterpret_cast<fftw_complex*>(buffer.data());
    FftwPlan plan(fftw_plan_dft_1d(static_cast<int>(buffer.size()), data, data, FFTW_FORWARD,
                                   FFTW_ESTIMATE));
    fftw_execute(plan.get());
    return buffer;
}

double evm_to_grid(std::span<const IqSample> samples, unsigned order, double amplitude)
{
    if (samples.empty())
        return 0.0;
    double acc = 0.0;
    for (auto s : samples) {
        const double angle = std::arg(s) - grid_residual(std::arg(s), order);
        acc += std::norm(s - std::polar(amplitude, angle));
    }
    return std::sqrt(acc / samples.size()) / amplitude;
}

} // namespace

void SyncConfig::validate() const
{
    if (!is_power_of_two(effective_order) || effective_order < 2 || effective_order > 64)
        throw Error(ErrorCode::DomainError, "effective order must be a power of two in [2, 64]");
    if (!(pll_loop_bandwidth > 0.0 && pll_loop_bandwidth < 0.5))
        throw Error(ErrorCode::DomainError, "PLL loop bandwidth must lie in (0, 0.5)");
    if (!(pll_damping > 0.0))
        throw Error(ErrorCode::DomainError, "PLL damping must be positive");
    if (!(detect_threshold > 0.0 && detect_threshold < 1.0))
        throw Error(ErrorCode::DomainError, "detection threshold must lie in (0, 1)");
    if (fft_oversample < 8)
        throw Error(ErrorCode::DomainError, "frequency estimator needs at least 8x zero padding");
}

unsigned effective_order(Scheme scheme, int phase_intensity)
{
    if (!is_psk(scheme))
        throw Error(ErrorCode::NotPsk, std::string(to_string(scheme)) + " has no PSK angle set");
    if (phase_intensity < 0 || phase_intensity > kMaxPhaseIntensity)
        throw Error(ErrorCode::DomainError, "phase intensity out of range");
    const unsigned base = log2_exact(order(scheme));
    return 1U << std::max(base, static_cast<unsigned>(phase_intensity));
}

double estimate_freq_offset(std::span<const IqSample> samples, const SyncConfig& cfg)
{
    cfg.validate();
    if (samples.size() < kMinFreqEstimateSamples)
        throw Error(ErrorCode::TooFewSamples,
                    "frequency estimation needs at least " + std::to_string(kMinFreqEstimateSamples) +
                        " samples");
    std::size_t nfft = 1;
    while (nfft < samples.size() * cfg.fft_oversample)
        nfft <<= 1;

    const double m = cfg.effective_order;
    std::vector<IqSample> buffer(nfft, IqSample(0.0, 0.0));
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const double mag = std::abs(samples[k]);
        if (mag > 0.0)
            buffer[k] = detail::ipow(samples[k] / mag, cfg.effective_order);
    }
    const auto spectrum = forward_fft(std::move(buffer));

    std::size_t peak = 0;
    double best = -1.0;
    for (std::size_t k = 0; k < nfft; ++k) {
        const double mag = std::abs(spectrum[k]);
        if (mag > best) {
            best = mag;
            peak = k;
        }
    }
    // Parabolic refinement over the neighbouring bins.
    const double left = std::abs(spectrum[(peak + nfft - 1) % nfft]);
    const double right = std::abs(spectrum[(peak + 1) % nfft]);
    const double curvature = left - 2.0 * best + right;
    const double delta = curvature < 0.0 ? 0.5 * (left - right) / curvature : 0.0;

    double freq = (static_cast<double>(peak) + delta) / static_cast<double>(nfft);
    if (freq >= 0.5)
        freq -= 1.0;
    return freq / m;
}

std::vector<IqSample> derotate(std::span<const IqSample> samples, double cfo, double phase)
{
    std::vector<IqSample> out(samples.size());
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const double cycles = std::fmod(cfo * static_cast<double>(k), 1.0);
        out[k] = samples[k] * std::polar(1.0, -(kTwoPi * cycles + phase));
    }
    return out;
}

PllOutput carrier_sync_pll(std::span<const IqSample> samples, const SyncConfig& cfg,
                           double initial_phase)
{
    cfg.validate();
    const double zeta = cfg.pll_damping;
    const double theta = cfg.pll_loop_bandwidth / (zeta + 0.25 / zeta);
    const double denom = 1.0 + 2.0 * zeta * theta + theta * theta;
    const double kp = 4.0 * zeta * theta / denom;
    const double ki = 4.0 * theta * theta / denom;

    double rms = 0.0;
    for (auto s : samples)
        rms += std::norm(s);
    rms = samples.empty() || rms == 0.0 ? 1.0 : std::sqrt(rms / samples.size());

    PllOutput out;
    out.samples.resize(samples.size());
    out.phase.resize(samples.size());
    double phase = initial_phase;
    double freq = 0.0;
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const IqSample y = samples[k] * std::polar(1.0, -phase);
        out.samples[k] = y;
        out.phase[k] = phase;
        // Amplitude-weighted sine of the angle to the nearest M_eff-PSK point.
        const double err = std::abs(y) / rms * std::sin(grid_residual(std::arg(y), cfg.effective_order));
        freq += ki * err;
        phase = std::remainder(phase + kp * err + freq, kTwoPi);
    }
    return out;
}

double mean_grid_phase_error(std::span<const IqSample> samples, unsigned order, std::size_t skip)
{
    if (skip >= samples.size())
        return 0.0;
    double acc = 0.0;
    for (std::size_t k = skip; k < samples.size(); ++k)
        acc += std::abs(grid_residual(std::arg(samples[k]), order));
    return acc / static_cast<double>(samples.size() - skip);
}

SyncResult frame_detect(std::span<const IqSample> samples, std::span<const IqSample> header,
                        double threshold, std::size_t max_lag)
{
    if (header.empty() || samples.size() < header.size())
        throw Error(ErrorCode::TooFewSamples, "input is shorter than the header");
    const std::size_t len = header.size();
    const std::size_t last = std::min(samples.size() - len, max_lag);

    double header_energy = 0.0;
    for (auto h : header)
        header_energy += std::norm(h);

    double window_energy = 0.0;
    for (std::size_t j = 0; j < len; ++j)
        window_energy += std::norm(samples[j]);

    SyncResult best;
    best.correlation_peak = -1.0;
    for (std::size_t lag = 0; lag <= last; ++lag) {
        if (lag > 0) {
            window_energy += std::norm(samples[lag + len - 1]) - std::norm(samples[lag - 1]);
            window_energy = std::max(window_energy, 0.0);
        }
        IqSample c(0.0, 0.0);
        for (std::size_t j = 0; j < len; ++j)
            c += std::conj(header[j]) * samples[lag + j];
        const double denom = header_energy * window_energy;
        const double rho = denom > 0.0 ? std::min(1.0, std::norm(c) / denom) : 0.0;
        if (rho > best.correlation_peak) {
            best.correlation_peak = rho;
            best.frame_start = lag;
            best.phase_estimate = std::arg(c);
        }
    }
    if (best.correlation_peak < threshold)
        throw Error(ErrorCode::NoFrame, "correlation peak " + std::to_string(best.correlation_peak) +
                                            " below threshold " + std::to_string(threshold));
    return best;
}

Reception receive_frame(std::span<const IqSample> samples, const ModConfig& mod,
                        const ShapingConfig& shaping, const FrameSpec& spec, const SyncConfig& sync,
                        std::span<const std::uint8_t> reference_bits)
{
    mod.validate();
    shaping.validate();
    spec.validate();
    sync.validate();
    if (!is_psk(mod.scheme))
        throw Error(ErrorCode::NotPsk, "only PSK frames can be received");

    const std::size_t frame_len = frame_symbol_count(spec, mod.scheme);
    if (samples.size() < frame_len)
        throw Error(ErrorCode::LengthMismatch, "captured block holds " + std::to_string(samples.size()) +
                                                   " samples, frame needs " + std::to_string(frame_len));

    std::vector<IqSample> work(samples.begin(), samples.end());
    double cfo = 0.0;
    if (sync.estimate_cfo) {
        cfo = estimate_freq_offset(work, sync);
        work = derotate(work, cfo);
    }

    const auto header = build_header(spec, mod.amplitude);
    Reception rx;
    rx.sync = frame_detect(work, header, sync.detect_threshold, samples.size() - frame_len);
    rx.sync.cfo_estimate = cfo;

    auto frame = derotate(std::span<const IqSample>(work).subspan(rx.sync.frame_start, frame_len), 0.0,
                          rx.sync.phase_estimate);
    if (sync.track_phase)
        frame = carrier_sync_pll(frame, sync).samples;

    const std::span<const IqSample> data = std::span<const IqSample>(frame).subspan(header.size());
    const auto factors = make_factor_stream(shaping, data.size());
    rx.stats.evm_pre = evm_to_grid(data, sync.effective_order, mod.amplitude);

    // Residual phase on the base constellation, estimated after removing the
    // rotations only so that small-magnitude symbols keep their low weight.
    const unsigned base = order(mod.scheme);
    IqSample acc(0.0, 0.0);
    for (std::size_t k = 0; k < data.size(); ++k) {
        const IqSample z = data[k] * std::polar(1.0, -factors.thetas[k]);
        const double mag = std::abs(z);
        if (mag > 0.0)
            acc += mag * detail::ipow(z / mag, base);
    }
    const double fine = std::abs(acc) > 0.0 ? std::arg(acc) / base : 0.0;

    const auto recovered = invert_shaping(derotate(data, 0.0, fine), factors);
    rx.indices = demodulate(recovered, mod);
    rx.bits = symbol_indices_to_bits(rx.indices, mod.scheme);

    const auto points = constellation(mod.scheme, mod.amplitude);
    double evm = 0.0;
    for (std::size_t k = 0; k < recovered.size(); ++k)
        evm += std::norm(recovered[k] - points[rx.indices[k]]);
    rx.stats.evm_post = recovered.empty() ? 0.0 : std::sqrt(evm / recovered.size()) / mod.amplitude;

    if (!reference_bits.empty()) {
        const std::size_t n = std::min(reference_bits.size(), rx.bits.size());
        rx.stats.bits_compared = n;
        for (std::size_t k = 0; k < n; ++k)
            rx.stats.bit_errors += (rx.bits[k] & 1U) != (reference_bits[k] & 1U);
        const std::size_t bps = bits_per_symbol(mod.scheme);
        const std::size_t nsym = n / bps;
        const auto ref_idx = bits_to_symbol_indices(reference_bits.first(nsym * bps), mod.scheme);
        rx.stats.symbols_compared = nsym;
        for (std::size_t k = 0; k < nsym; ++k)
            rx.stats.symbol_errors += ref_idx[k] != rx.indices[k];
    }
    return rx;
}

} // namespace ringsig
