#pragma once

#include <span>

namespace ringswarm::detail {

/// Cyclic convolution out[i] = sum_j a[(i - j) mod m] * b[j] through FFTW.
/// Plans are created once per length and shared; execution is thread-safe.
void cyclic_convolve(std::span<const double> a, std::span<const double> b, std::span<double> out);

}  // namespace ringswarm::detail
