#include "ringsig/features.hpp"

#include "ringsig/error.hpp"

#include <cmath>
#include <string>

namespace ringsig {

const std::array<std::string_view, kFeatureCount>& feature_names()
{
    static const std::array<std::string_view, kFeatureCount> names = {
        "abs_c20", "abs_c40", "abs_c41", "c42",    "abs_c63", "amp_mean", "amp_var",
        "amp_kurt", "grid2",  "grid4",   "grid8",  "grid16",  "grid32",   "grid64",
    };
    return names;
}

FeatureVector extract_features(std::span<const IqSample> samples)
{
    if (samples.size() < kMinFeatureSamples)
        throw Error(ErrorCode::TooFewSamples, "feature extraction needs at least " +
                                                  std::to_string(kMinFeatureSamples) + " samples");
    const double n = static_cast<double>(samples.size());
    double power = 0.0;
    for (auto s : samples)
        power += std::norm(s);
    power /= n;
    if (!(power > 0.0) || !std::isfinite(power))
        throw Error(ErrorCode::DomainError, "input block has no finite energy");
    const double inv_rms = 1.0 / std::sqrt(power);

    using cd = std::complex<double>;
    cd m20{}, m40{}, m41{};
    double m21 = 0.0, m42 = 0.0, m63 = 0.0, amp = 0.0;
    std::array<cd, 6> grid{};
    for (auto raw : samples) {
        const cd s = raw * inv_rms;
        const double p = std::norm(s);
        const cd s2 = s * s;
        m20 += s2;
        m21 += p;
        m40 += s2 * s2;
        m41 += s2 * p;
        m42 += p * p;
        m63 += p * p * p;
        const double a = std::sqrt(p);
        amp += a;
        if (a > 0.0) {
            cd u = s / a;
            for (auto& g : grid) {
                u *= u;
                g += u;
            }
        }
    }
    m20 /= n;
    m40 /= n;
    m41 /= n;
    m21 /= n;
    m42 /= n;
    m63 /= n;
    amp /= n;

    const cd m22 = std::conj(m20);
    const cd m43 = std::conj(m41);
    const cd c40 = m40 - 3.0 * m20 * m20;
    const cd c41 = m41 - 3.0 * m20 * m21;
    const double c42 = m42 - std::norm(m20) - 2.0 * m21 * m21;
    const cd c63 = m63 - 9.0 * m42 * m21 + 12.0 * m21 * m21 * m21 - 3.0 * m20 * m43 -
                   3.0 * m22 * m41 + 18.0 * m20 * m22 * m21;

    double var = 0.0, fourth = 0.0;
    for (auto raw : samples) {
        const double d = std::abs(raw) * inv_rms - amp;
        var += d * d;
        fourth += d * d * d * d;
    }
    var /= n;
    fourth /= n;
    // Regularized so constant-modulus blocks give a finite, stable value.
    const double reg = var + 1e-6;

    FeatureVector f{};
    f[0] = std::abs(m20);
    f[1] = std::abs(c40);
    f[2] = std::abs(c41);
    f[3] = c42;
    f[4] = std::abs(c63);
    f[5] = amp;
    f[6] = var;
    f[7] = fourth / (reg * reg);
    for (std::size_t k = 0; k < grid.size(); ++k)
        f[8 + k] = std::abs(grid[k]) / n;
    return f;
}

} // namespace ringsig
