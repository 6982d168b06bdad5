#include "ringsig/channel.hpp"

#include "ringsig/error.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace ringsig {

void ChannelConfig::validate() const
{
    if (!(std::abs(cfo) < 0.5))
        throw Error(ErrorCode::DomainError, "|cfo| must be below 0.5 cycles/symbol");
    if (std::isnan(es_n0_db) || es_n0_db == -std::numeric_limits<double>::infinity())
        throw Error(ErrorCode::DomainError, "Es/N0 must be a number or +inf");
    if (!std::isfinite(phase_offset))
        throw Error(ErrorCode::DomainError, "phase offset must be finite");
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double linear_to_db(double ratio) { return 10.0 * std::log10(ratio); }

double mean_power(std::span<const IqSample> samples)
{
    if (samples.empty())
        return 0.0;
    double acc = 0.0;
    for (auto s : samples)
        acc += std::norm(s);
    return acc / static_cast<double>(samples.size());
}

double awgn_noise_variance(std::span<const IqSample> samples, double es_n0_db)
{
    if (samples.empty())
        throw Error(ErrorCode::EmptyInput, "cannot measure the power of an empty block");
    if (es_n0_db == std::numeric_limits<double>::infinity())
        return 0.0;
    return mean_power(samples) / db_to_linear(es_n0_db);
}

std::vector<IqSample> apply_awgn(std::span<const IqSample> samples, const ChannelConfig& cfg)
{
    cfg.validate();
    const double n0 = awgn_noise_variance(samples, cfg.es_n0_db);
    std::vector<IqSample> out(samples.begin(), samples.end());
    if (n0 == 0.0)
        return out;
    std::mt19937_64 rng(cfg.noise_seed);
    std::normal_distribution<double> gauss(0.0, std::sqrt(n0 / 2.0));
    for (auto& s : out) {
        const double i = gauss(rng);
        const double q = gauss(rng);
        s += IqSample(i, q);
    }
    return out;
}

std::vector<IqSample> apply_cfo(std::span<const IqSample> samples, const ChannelConfig& cfg)
{
    cfg.validate();
    std::vector<IqSample> out(samples.size());
    for (std::size_t k = 0; k < samples.size(); ++k) {
        // Reduce the cycle count before scaling so long blocks keep full precision.
        const double cycles = std::fmod(cfg.cfo * static_cast<double>(k), 1.0);
        out[k] = samples[k] * std::polar(1.0, 2.0 * std::numbers::pi * cycles + cfg.phase_offset);
    }
    return out;
}

std::vector<IqSample> apply_channel(std::span<const IqSample> samples, const ChannelConfig& cfg)
{
    return apply_awgn(apply_cfo(samples, cfg), cfg);
}

} // namespace ringsig
