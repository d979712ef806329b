#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <vector>

namespace nse {

// Mono audio in [-1, 1].
struct AudioClip {
  int sample_rate_hz = 0;
  std::vector<double> samples;

  void validate() const;
};

// Short-time Fourier transform with a periodic Hann window. The signal is
// zero-padded so every sample gets full analysis-window coverage; istft
// divides by the accumulated squared synthesis window, which makes
// istft(stft(x)) an identity up to floating-point roundoff.
struct StftData {
  std::size_t fft_size = 2048;
  std::size_t hop = 512;
  std::size_t n_samples = 0;  // original clip length
  Eigen::MatrixXd re, im;     // n_frames x (fft_size/2 + 1), one-sided
};

StftData stft(const std::vector<double>& x, std::size_t fft_size = 2048, std::size_t hop = 512);
std::vector<double> istft(const StftData& s);

// Rational-ratio polyphase resampler with a Kaiser-windowed sinc prototype
// (beta = 8.6, 64 taps per phase). Output length is round(n * target/source).
// Equal rates return the input unchanged. `clipped` reports samples clamped
// to [-1, 1].
AudioClip resample(const AudioClip& clip, int target_hz, std::size_t* clipped = nullptr);

struct GateOptions {
  std::size_t fft_size = 2048;
  std::size_t hop = 512;
  double profile_sigma_mult = 1.5;  // threshold = profile mean + mult * std
  double percentile = 0.20;         // profile-free mode: per-bin percentile...
  double percentile_mult = 2.0;     // ...scaled by this factor
  double sigmoid_width = 0.25;      // relative to the threshold
};

struct GateStats {
  double mask_min = 1.0;
  double mask_max = 0.0;
  std::size_t clipped = 0;
};

// Stationary spectral gating: per-bin magnitude thresholds from a noise
// profile (or the clip's own percentile statistics), a soft sigmoid mask
// smoothed over a 3x3 time-frequency neighborhood, and WOLA resynthesis.
AudioClip spectral_gate(const AudioClip& clip, const AudioClip& noise_profile,
                        const GateOptions& opts = {}, GateStats* stats = nullptr);
AudioClip spectral_gate(const AudioClip& clip, const GateOptions& opts = {},
                        GateStats* stats = nullptr);

// WAV, canonical RIFF, PCM16 or IEEE float32. Stereo inputs are averaged to
// mono with a warning.
AudioClip read_wav(const std::string& path);
void write_wav(const std::string& path, const AudioClip& clip, bool ieee_float = true);

}  // namespace nse
