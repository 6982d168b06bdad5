#pragma once

#include "ringsig/modem.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <string_view>

namespace ringsig {

inline constexpr std::size_t kMinFeatureSamples = 1024;
inline constexpr std::size_t kFeatureCount = 14;

using FeatureVector = std::array<double, kFeatureCount>;

/// Feature layout, in order:
///   |C20| |C40| |C41| C42 |C63|        cumulants of the unit-RMS sequence
///   amp_mean amp_var amp_kurt          statistics of |s|
///   grid2 grid4 grid8 grid16 grid32 grid64
/// gridN = |mean((s/|s|)^N)|, how tightly the phases sit on an N-point grid.
/// Every feature is invariant to scale and to a common phase rotation.
const std::array<std::string_view, kFeatureCount>& feature_names();

FeatureVector extract_features(std::span<const IqSample> samples);

} // namespace ringsig
