#pragma once

#include <string>
#include <vector>

#include "nse/recording.hpp"

namespace nse {

// One biquad section, denominator normalized to a0 = 1.
struct Biquad {
  double b0 = 0.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;

  // Poles strictly inside the unit circle.
  bool stable() const;
};

// Cascaded-biquad IIR filter.
struct SosFilter {
  std::vector<Biquad> sections;
  std::string description;

  std::size_t n_sections() const { return sections.size(); }
  int order() const { return static_cast<int>(2 * sections.size()); }
};

// Butterworth bandpass via analog prototype, frequency prewarping and the
// bilinear transform. `order` is the analog prototype order; the digital
// filter has order 2 * order. Band edges land at exactly -3.0103 dB.
SosFilter design_bandpass(int order, double low_hz, double high_hz, double fs_hz);

// Single-biquad notch with unity gain at DC and Nyquist, null at center_hz.
SosFilter design_notch(double center_hz, double q, double fs_hz);

// Zero-phase forward-backward filtering per channel with odd-reflection edge
// padding of 3 x filter order and steady-state initial conditions.
Recording filtfilt(const SosFilter& filter, const Recording& rec);

// Same, on a single channel.
std::vector<double> filtfilt_channel(const SosFilter& filter, const std::vector<double>& x);

}  // namespace nse
