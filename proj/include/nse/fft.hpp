#pragma once

#include <cstddef>
#include <vector>

namespace nse {

// In-place iterative radix-2 FFT over split real/imag arrays.
// Sizes are powers of two; callers zero-pad or crop at well-defined points
// (noise synthesis pads to the next power of two, Welch pads segments).
// The inverse transform includes the 1/N factor.

std::size_t next_pow2(std::size_t n);

void fft_pow2(std::vector<double>& re, std::vector<double>& im, bool inverse);

}  // namespace nse
