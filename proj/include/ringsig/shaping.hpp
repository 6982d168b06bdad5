#pragma once

#include "ringsig/modem.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ringsig {

inline constexpr int kMaxPhaseIntensity = 16;

// Magnitude factors below this floor cannot be inverted.
inline constexpr double kMagnitudeFloor = 1e-6;

/// Shared secret between transmitter and receiver.
struct ShapingConfig {
    std::uint64_t seed = 0;
    int phase_intensity = 0;          // I_p: rotations on a 2^I_p grid
    double magnitude_intensity = 1.0; // I_m: lower bound of the magnitude factor

    void validate() const;
};

struct FactorStream {
    std::vector<double> thetas;
    std::vector<double> magnitudes;

    std::size_t size() const noexcept { return thetas.size(); }
};

/// theta_k = 2*pi*d_k / 2^I_p where d_k is I_p uniform bits of the
/// ("phase", k) draw. `first` offsets the symbol counter.
std::vector<double> gen_phase_factors(const ShapingConfig& cfg, std::size_t count,
                                      std::size_t first = 0);

/// M_k ~ Uniform[I_m, 1] from the ("magnitude", k) draw.
std::vector<double> gen_magnitude_factors(const ShapingConfig& cfg, std::size_t count,
                                          std::size_t first = 0);

FactorStream make_factor_stream(const ShapingConfig& cfg, std::size_t count, std::size_t first = 0);

/// Multiplies sample k by M_k * exp(j*theta_k).
std::vector<IqSample> apply_shaping(std::span<const IqSample> samples, const FactorStream& factors);

/// Multiplies sample k by exp(-j*theta_k) / M_k.
std::vector<IqSample> invert_shaping(std::span<const IqSample> samples, const FactorStream& factors);

/// Transmit power of the ring constellation using the mean amplitude
/// A*(I_m+1)/2, i.e. (A*(I_m+1)/2)^2.
double ring_power(double amplitude, double magnitude_intensity);

/// Gaussian tail probability.
double q_function(double x);

enum class RingBerMode {
    Literal,  // 2Q(sqrt(((I_m+1)/2)^2 * E0/N0))
    Averaged, // E_M[2Q(sqrt(M^2 * E0/N0))], M ~ Uniform[I_m, 1]
};

/// Error-rate expression of the ring-shaped QPSK link. `es_n0` is the linear
/// ratio of the unshaped symbol energy to N0. The averaged mode is a
/// stratified Monte Carlo estimate with `draws` samples.
double theoretical_ber_ring(double es_n0, double magnitude_intensity,
                            RingBerMode mode = RingBerMode::Literal, std::size_t draws = 100000);

/// Closed-form Gray-coded MPSK bit error rate (exact for BPSK and QPSK,
/// nearest-neighbour approximation above).
double theoretical_ber_mpsk(Scheme scheme, double es_n0);

} // namespace ringsig
