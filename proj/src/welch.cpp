#include "nse/welch.hpp"

#include <cmath>

#include "nse/errors.hpp"
#include "nse/fft.hpp"

namespace nse {

Psd welch_psd(const std::vector<double>& x, double fs_hz, std::size_t nperseg) {
  if (nperseg < 2) throw InvalidParameterError("welch_psd: nperseg must be >= 2");
  if (x.size() < nperseg)
    throw LengthError("welch_psd: signal of " + std::to_string(x.size()) +
                      " samples is shorter than nperseg=" + std::to_string(nperseg));

  const std::size_t hop = nperseg / 2;
  const std::size_t n_segments = (x.size() - nperseg) / hop + 1;
  const std::size_t nfft = next_pow2(nperseg);
  const std::size_t n_bins = nfft / 2 + 1;

  std::vector<double> window(nperseg);
  double win_energy = 0.0;
  for (std::size_t i = 0; i < nperseg; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(i) /
                                     static_cast<double>(nperseg));
    win_energy += window[i] * window[i];
  }

  Psd out;
  out.freq_hz.resize(n_bins);
  out.density.assign(n_bins, 0.0);
  for (std::size_t k = 0; k < n_bins; ++k)
    out.freq_hz[k] = fs_hz * static_cast<double>(k) / static_cast<double>(nfft);

  std::vector<double> re(nfft), im(nfft);
  for (std::size_t s = 0; s < n_segments; ++s) {
    std::fill(re.begin(), re.end(), 0.0);
    std::fill(im.begin(), im.end(), 0.0);
    const std::size_t start = s * hop;
    for (std::size_t i = 0; i < nperseg; ++i) re[i] = x[start + i] * window[i];
    fft_pow2(re, im, false);
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double mag2 = re[k] * re[k] + im[k] * im[k];
      const double one_sided = (k == 0 || k == nfft / 2) ? 1.0 : 2.0;
      out.density[k] += one_sided * mag2 / (fs_hz * win_energy);
    }
  }
  for (auto& d : out.density) d /= static_cast<double>(n_segments);
  return out;
}

double band_power(const Psd& psd, double low_hz, double high_hz) {
  if (psd.freq_hz.size() < 2) throw InvalidParameterError("band_power: degenerate PSD");
  const double df = psd.freq_hz[1] - psd.freq_hz[0];
  double power = 0.0;
  for (std::size_t k = 0; k < psd.freq_hz.size(); ++k) {
    if (psd.freq_hz[k] >= low_hz && psd.freq_hz[k] < high_hz) power += psd.density[k] * df;
  }
  return power;
}

}  // namespace nse
