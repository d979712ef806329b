#pragma once

#include <cstddef>
#include <vector>

namespace nse {

// One-sided power spectral density.
struct Psd {
  std::vector<double> freq_hz;
  std::vector<double> density;  // power per Hz
};

// Welch's method: Hann-windowed segments of nperseg samples, 50% overlap,
// FFT zero-padded to the next power of two. Requires x.size() >= nperseg.
Psd welch_psd(const std::vector<double>& x, double fs_hz, std::size_t nperseg);

// Integrated power over [low_hz, high_hz) from a one-sided PSD.
double band_power(const Psd& psd, double low_hz, double high_hz);

}  // namespace nse
