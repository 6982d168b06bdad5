#include "ringsig/shaping.hpp"

#include "ringsig/error.hpp"
#include "ringsig/random.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace ringsig {

namespace {

void check_lengths(std::span<const IqSample> samples, const FactorStream& factors)
{
    if (factors.thetas.size() != factors.magnitudes.size())
        throw Error(ErrorCode::LengthMismatch, "factor stream has unequal theta/magnitude lengths");
    if (samples.size() != factors.size())
        throw Error(ErrorCode::LengthMismatch,
                    std::to_string(samples.size()) + " samples vs " +
                        std::to_string(factors.size()) + " factors");
}

} // namespace

void ShapingConfig::validate() const
{
    if (phase_intensity < 0 || phase_intensity > kMaxPhaseIntensity)
        throw Error(ErrorCode::DomainError,
                    "phase intensity must lie in [0, " + std::to_string(kMaxPhaseIntensity) + "]");
    if (!(magnitude_intensity > 0.0 && magnitude_intensity <= 1.0))
        throw Error(ErrorCode::DomainError, "magnitude intensity must lie in (0, 1]");
}

std::vector<double> gen_phase_factors(const ShapingConfig& cfg, std::size_t count, std::size_t first)
{
    cfg.validate();
    std::vector<double> out(count, 0.0);
    if (cfg.phase_intensity == 0)
        return out;
    const CounterStream stream(cfg.seed, "phase");
    const unsigned levels_log2 = static_cast<unsigned>(cfg.phase_intensity);
    const double step = 2.0 * std::numbers::pi / static_cast<double>(1ULL << levels_log2);
    for (std::size_t k = 0; k < count; ++k) {
        const std::uint64_t d = stream.bits(first + k) >> (64 - levels_log2);
        out[k] = step * static_cast<double>(d);
    }
    return out;
}

std::vector<double> gen_magnitude_factors(const ShapingConfig& cfg, std::size_t count,
                                          std::size_t first)
{
    cfg.validate();
    const double lo = cfg.magnitude_intensity;
    std::vector<double> out(count, 1.0);
    if (lo == 1.0)
        return out;
    const CounterStream stream(cfg.seed, "magnitude");
    for (std::size_t k = 0; k < count; ++k)
        out[k] = lo + (1.0 - lo) * stream.uniform(first + k);
    return out;
}

FactorStream make_factor_stream(const ShapingConfig& cfg, std::size_t count, std::size_t first)
{
    return {gen_phase_factors(cfg, count, first), gen_magnitude_factors(cfg, count, first)};
}

std::vector<IqSample> apply_shaping(std::span<const IqSample> samples, const FactorStream& factors)
{
    check_lengths(samples, factors);
    std::vector<IqSample> out(samples.size());
    for (std::size_t k = 0; k < samples.size(); ++k)
        out[k] = samples[k] * std::polar(factors.magnitudes[k], factors.thetas[k]);
    return out;
}

std::vector<IqSample> invert_shaping(std::span<const IqSample> samples, const FactorStream& factors)
{
    check_lengths(samples, factors);
    for (std::size_t k = 0; k < factors.size(); ++k)
        if (!(factors.magnitudes[k] >= kMagnitudeFloor))
            throw Error(ErrorCode::DegenerateFactor,
                        "magnitude factor at " + std::to_string(k) + " is below the floor");
    std::vector<IqSample> out(samples.size());
    for (std::size_t k = 0; k < samples.size(); ++k)
        out[k] = samples[k] * std::polar(1.0 / factors.magnitudes[k], -factors.thetas[k]);
    return out;
}

double ring_power(double amplitude, double magnitude_intensity)
{
    // I_m = 0 is admitted here; the formula stays defined even though the
    // shaping path requires I_m > 0.
    if (!(amplitude > 0.0) || !(magnitude_intensity >= 0.0 && magnitude_intensity <= 1.0))
        throw Error(ErrorCode::DomainError, "ring_power requires A > 0 and 0 <= I_m <= 1");
    const double mean_amplitude = amplitude * (magnitude_intensity + 1.0) / 2.0;
    return mean_amplitude * mean_amplitude;
}

double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double theoretical_ber_ring(double es_n0, double magnitude_intensity, RingBerMode mode,
                            std::size_t draws)
{
    if (!(es_n0 >= 0.0) || !(magnitude_intensity > 0.0 && magnitude_intensity <= 1.0))
        throw Error(ErrorCode::DomainError, "theoretical_ber_ring requires E0/N0 >= 0 and 0 < I_m <= 1");
    if (mode == RingBerMode::Literal || magnitude_intensity == 1.0) {
        const double m = (magnitude_intensity + 1.0) / 2.0;
        return 2.0 * q_function(std::sqrt(m * m * es_n0));
    }
    if (draws == 0)
        throw Error(ErrorCode::DomainError, "averaged mode needs at least one draw");
    // One uniform draw per stratum of [I_m, 1].
    const CounterStream stream(0x52494E47ULL, "ber-average");
    const double lo = magnitude_intensity;
    double acc = 0.0;
    for (std::size_t i = 0; i < draws; ++i) {
        const double u = (static_cast<double>(i) + stream.uniform(i)) / static_cast<double>(draws);
        const double m = lo + (1.0 - lo) * u;
        acc += 2.0 * q_function(std::sqrt(m * m * es_n0));
    }
    return acc / static_cast<double>(draws);
}

double theoretical_ber_mpsk(Scheme scheme, double es_n0)
{
    if (!is_psk(scheme))
        throw Error(ErrorCode::NotPsk, "closed-form BER is only provided for PSK");
    if (!(es_n0 >= 0.0))
        throw Error(ErrorCode::DomainError, "Es/N0 must be non-negative");
    switch (scheme) {
    case Scheme::Bpsk:
        return q_function(std::sqrt(2.0 * es_n0));
    case Scheme::Qpsk:
        return q_function(std::sqrt(es_n0));
    default: {
        const double m = order(scheme);
        const double k = bits_per_symbol(scheme);
        return 2.0 / k * q_function(std::sqrt(2.0 * es_n0) * std::sin(std::numbers::pi / m));
    }
    }
}

} // namespace ringsig
