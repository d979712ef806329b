#include "nse/audio.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nse/errors.hpp"
#include "nse/fft.hpp"
#include "nse/log.hpp"

namespace nse {

void AudioClip::validate() const {
  if (sample_rate_hz <= 0) throw ValidationError("AudioClip: sample rate must be positive");
  for (double s : samples)
    if (!std::isfinite(s)) throw ValidationError("AudioClip: non-finite sample");
}

namespace {

std::vector<double> hann_periodic(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n));
  return w;
}

std::size_t clamp_unit(std::vector<double>& x) {
  std::size_t clipped = 0;
  for (auto& v : x) {
    if (v > 1.0) {
      v = 1.0;
      ++clipped;
    } else if (v < -1.0) {
      v = -1.0;
      ++clipped;
    }
  }
  return clipped;
}

}  // namespace

StftData stft(const std::vector<double>& x, std::size_t fft_size, std::size_t hop) {
  if (fft_size < 4 || (fft_size & (fft_size - 1)) != 0)
    throw InvalidParameterError("stft: fft_size must be a power of two >= 4");
  if (hop == 0 || hop > fft_size || fft_size % hop != 0)
    throw InvalidParameterError("stft: hop must divide fft_size");
  if (x.empty()) throw LengthError("stft: empty signal");

  StftData s;
  s.fft_size = fft_size;
  s.hop = hop;
  s.n_samples = x.size();

  const std::size_t pad_left = fft_size - hop;
  const std::size_t n_frames = (pad_left + x.size() - 1) / hop + 1;
  const std::size_t n_bins = fft_size / 2 + 1;
  const auto window = hann_periodic(fft_size);

  s.re.resize(static_cast<Eigen::Index>(n_frames), static_cast<Eigen::Index>(n_bins));
  s.im.resize(static_cast<Eigen::Index>(n_frames), static_cast<Eigen::Index>(n_bins));

  std::vector<double> re(fft_size), im(fft_size);
  for (std::size_t f = 0; f < n_frames; ++f) {
    std::fill(re.begin(), re.end(), 0.0);
    std::fill(im.begin(), im.end(), 0.0);
    for (std::size_t i = 0; i < fft_size; ++i) {
      // Global sample index minus the left padding.
      const auto src = static_cast<std::ptrdiff_t>(f * hop + i) -
                       static_cast<std::ptrdiff_t>(pad_left);
      if (src >= 0 && src < static_cast<std::ptrdiff_t>(x.size()))
        re[i] = x[static_cast<std::size_t>(src)] * window[i];
    }
    fft_pow2(re, im, false);
    for (std::size_t k = 0; k < n_bins; ++k) {
      s.re(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(k)) = re[k];
      s.im(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(k)) = im[k];
    }
  }
  return s;
}

std::vector<double> istft(const StftData& s) {
  const std::size_t fft_size = s.fft_size;
  const std::size_t hop = s.hop;
  const std::size_t pad_left = fft_size - hop;
  const auto n_frames = static_cast<std::size_t>(s.re.rows());
  const std::size_t n_bins = fft_size / 2 + 1;
  const auto window = hann_periodic(fft_size);

  const std::size_t total = (n_frames - 1) * hop + fft_size;
  std::vector<double> acc(total, 0.0), weight(total, 0.0);

  std::vector<double> re(fft_size), im(fft_size);
  for (std::size_t f = 0; f < n_frames; ++f) {
    for (std::size_t k = 0; k < n_bins; ++k) {
      re[k] = s.re(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(k));
      im[k] = s.im(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(k));
    }
    for (std::size_t k = n_bins; k < fft_size; ++k) {
      re[k] = re[fft_size - k];
      im[k] = -im[fft_size - k];
    }
    fft_pow2(re, im, true);
    for (std::size_t i = 0; i < fft_size; ++i) {
      acc[f * hop + i] += re[i] * window[i];
      weight[f * hop + i] += window[i] * window[i];
    }
  }

  std::vector<double> out(s.n_samples, 0.0);
  for (std::size_t i = 0; i < s.n_samples; ++i) {
    const double w = weight[pad_left + i];
    out[i] = w > 0.0 ? acc[pad_left + i] / w : 0.0;
  }
  return out;
}

namespace {

double bessel_i0(double x) {
  // Power series; converges quickly for the beta values used here.
  double sum = 1.0, term = 1.0;
  const double half_sq = x * x / 4.0;
  for (int k = 1; k < 64; ++k) {
    term *= half_sq / (static_cast<double>(k) * static_cast<double>(k));
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return sum;
}

uint64_t gcd_u64(uint64_t a, uint64_t b) { return b == 0 ? a : gcd_u64(b, a % b); }

}  // namespace

AudioClip resample(const AudioClip& clip, int target_hz, std::size_t* clipped) {
  clip.validate();
  if (target_hz <= 0) throw InvalidParameterError("resample: target_hz must be positive");
  if (clipped) *clipped = 0;
  if (target_hz == clip.sample_rate_hz) return clip;

  const uint64_t g = gcd_u64(static_cast<uint64_t>(target_hz),
                             static_cast<uint64_t>(clip.sample_rate_hz));
  const auto up = static_cast<std::size_t>(static_cast<uint64_t>(target_hz) / g);      // L
  const auto down = static_cast<std::size_t>(static_cast<uint64_t>(clip.sample_rate_hz) / g);  // M

  constexpr std::size_t taps_per_phase = 64;
  constexpr double beta = 8.6;
  const std::size_t n_taps = taps_per_phase * up;
  const double center = static_cast<double>(n_taps - 1) / 2.0;
  const double cutoff = M_PI / static_cast<double>(std::max(up, down));

  // Kaiser-windowed sinc prototype at the upsampled rate, gain L in-band.
  std::vector<double> h(n_taps);
  const double i0_beta = bessel_i0(beta);
  for (std::size_t k = 0; k < n_taps; ++k) {
    const double t = static_cast<double>(k) - center;
    const double sinc = t == 0.0 ? cutoff / M_PI : std::sin(cutoff * t) / (M_PI * t);
    const double u = 2.0 * static_cast<double>(k) / static_cast<double>(n_taps - 1) - 1.0;
    const double kaiser = bessel_i0(beta * std::sqrt(std::max(0.0, 1.0 - u * u))) / i0_beta;
    h[k] = static_cast<double>(up) * sinc * kaiser;
  }

  const auto n_in = clip.samples.size();
  const auto n_out = static_cast<std::size_t>(std::llround(
      static_cast<double>(n_in) * static_cast<double>(target_hz) / clip.sample_rate_hz));

  AudioClip out;
  out.sample_rate_hz = target_hz;
  out.samples.resize(n_out, 0.0);

  // Output m sits at upsampled index m*M + center (group delay removed).
  const auto center_i = static_cast<std::size_t>(n_taps - 1) / 2;
  for (std::size_t m = 0; m < n_out; ++m) {
    const std::size_t u_idx = m * down + center_i;
    const std::size_t phase = u_idx % up;
    const auto n0 = static_cast<std::ptrdiff_t>(u_idx / up);
    double acc = 0.0;
    for (std::size_t k = 0; k < taps_per_phase; ++k) {
      const auto src = n0 - static_cast<std::ptrdiff_t>(k);
      if (src < 0 || src >= static_cast<std::ptrdiff_t>(n_in)) continue;
      acc += h[phase + k * up] * clip.samples[static_cast<std::size_t>(src)];
    }
    out.samples[m] = acc;
  }

  const std::size_t n_clipped = clamp_unit(out.samples);
  if (clipped) *clipped = n_clipped;
  if (n_clipped > 0)
    log_warn("resample: clamped " + std::to_string(n_clipped) + " samples to [-1, 1]");
  return out;
}

namespace {

AudioClip gate_impl(const AudioClip& clip, const Eigen::VectorXd& threshold,
                    const GateOptions& opts, GateStats* stats) {
  StftData s = stft(clip.samples, opts.fft_size, opts.hop);
  const auto n_frames = s.re.rows();
  const auto n_bins = s.re.cols();

  const Eigen::MatrixXd mag = (s.re.array().square() + s.im.array().square()).sqrt();

  Eigen::MatrixXd mask(n_frames, n_bins);
  for (Eigen::Index f = 0; f < n_frames; ++f) {
    for (Eigen::Index k = 0; k < n_bins; ++k) {
      const double thr = threshold(k);
      const double width = std::max(opts.sigmoid_width * thr, 1e-30);
      const double arg = (mag(f, k) - thr) / width;
      mask(f, k) = 1.0 / (1.0 + std::exp(-arg));
    }
  }

  // 3x3 smoothing over the time-frequency grid, boundaries use the valid
  // neighborhood only.
  Eigen::MatrixXd smoothed(n_frames, n_bins);
  for (Eigen::Index f = 0; f < n_frames; ++f) {
    for (Eigen::Index k = 0; k < n_bins; ++k) {
      double sum = 0.0;
      int count = 0;
      for (Eigen::Index df = -1; df <= 1; ++df) {
        for (Eigen::Index dk = -1; dk <= 1; ++dk) {
          const Eigen::Index ff = f + df, kk = k + dk;
          if (ff < 0 || ff >= n_frames || kk < 0 || kk >= n_bins) continue;
          sum += mask(ff, kk);
          ++count;
        }
      }
      smoothed(f, k) = sum / count;
    }
  }

  s.re.array() *= smoothed.array();
  s.im.array() *= smoothed.array();

  AudioClip out;
  out.sample_rate_hz = clip.sample_rate_hz;
  out.samples = istft(s);
  const std::size_t n_clipped = clamp_unit(out.samples);
  if (n_clipped > 0)
    log_warn("spectral_gate: clamped " + std::to_string(n_clipped) + " samples to [-1, 1]");
  if (stats) {
    stats->mask_min = smoothed.minCoeff();
    stats->mask_max = smoothed.maxCoeff();
    stats->clipped = n_clipped;
  }
  return out;
}

void check_gate_length(const AudioClip& clip, const GateOptions& opts, const char* what) {
  if (clip.samples.size() < 2 * opts.fft_size)
    throw LengthError(std::string("spectral_gate: ") + what + " of " +
                      std::to_string(clip.samples.size()) + " samples is shorter than 2 x FFT (" +
                      std::to_string(2 * opts.fft_size) + ")");
}

}  // namespace

AudioClip spectral_gate(const AudioClip& clip, const AudioClip& noise_profile,
                        const GateOptions& opts, GateStats* stats) {
  clip.validate();
  noise_profile.validate();
  check_gate_length(clip, opts, "clip");
  check_gate_length(noise_profile, opts, "noise profile");
  if (noise_profile.sample_rate_hz != clip.sample_rate_hz)
    throw AlignmentError("spectral_gate: noise profile sample rate differs from the clip");

  const StftData p = stft(noise_profile.samples, opts.fft_size, opts.hop);
  const Eigen::MatrixXd mag = (p.re.array().square() + p.im.array().square()).sqrt();
  const Eigen::RowVectorXd mean = mag.colwise().mean();
  const Eigen::RowVectorXd var = (mag.rowwise() - mean).array().square().colwise().mean();
  const Eigen::VectorXd threshold =
      (mean + opts.profile_sigma_mult * var.array().sqrt().matrix()).transpose();
  return gate_impl(clip, threshold, opts, stats);
}

AudioClip spectral_gate(const AudioClip& clip, const GateOptions& opts, GateStats* stats) {
  clip.validate();
  check_gate_length(clip, opts, "clip");

  const StftData s = stft(clip.samples, opts.fft_size, opts.hop);
  const Eigen::MatrixXd mag = (s.re.array().square() + s.im.array().square()).sqrt();
  const auto n_frames = static_cast<std::size_t>(mag.rows());

  Eigen::VectorXd threshold(mag.cols());
  std::vector<double> column(n_frames);
  for (Eigen::Index k = 0; k < mag.cols(); ++k) {
    for (std::size_t f = 0; f < n_frames; ++f)
      column[f] = mag(static_cast<Eigen::Index>(f), k);
    std::sort(column.begin(), column.end());
    const double pos = opts.percentile * static_cast<double>(n_frames - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, n_frames - 1);
    const double frac = pos - static_cast<double>(lo);
    threshold(k) = opts.percentile_mult * ((1.0 - frac) * column[lo] + frac * column[hi]);
  }
  return gate_impl(clip, threshold, opts, stats);
}

}  // namespace nse
