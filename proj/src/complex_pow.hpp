#pragma once

#include <complex>

namespace ringsig::detail {

// Repeated squaring; exact for the unit-magnitude lattice points used here.
inline std::complex<double> ipow(std::complex<double> z, unsigned n)
{
    std::complex<double> result(1.0, 0.0);
    while (n) {
        if (n & 1U)
            result *= z;
        z *= z;
        n >>= 1;
    }
    return result;
}

} // namespace ringsig::detail
