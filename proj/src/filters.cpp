#include "nse/filters.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

#include "nse/errors.hpp"
#include "nse/parallel.hpp"

namespace nse {

namespace {

using cplx = std::complex<double>;

// |H(e^{jw})| for one biquad at digital frequency w (rad/sample).
double biquad_mag(const Biquad& s, double w) {
  const cplx z = std::exp(cplx(0.0, -w));
  const cplx num = s.b0 + s.b1 * z + s.b2 * z * z;
  const cplx den = 1.0 + s.a1 * z + s.a2 * z * z;
  return std::abs(num / den);
}

double sos_mag(const SosFilter& f, double w) {
  double m = 1.0;
  for (const auto& s : f.sections) m *= biquad_mag(s, w);
  return m;
}

}  // namespace

bool Biquad::stable() const {
  // Roots of z^2 + a1 z + a2.
  const cplx disc = std::sqrt(cplx(a1 * a1 - 4.0 * a2, 0.0));
  const cplx r1 = (-a1 + disc) / 2.0;
  const cplx r2 = (-a1 - disc) / 2.0;
  return std::abs(r1) < 1.0 && std::abs(r2) < 1.0;
}

SosFilter design_bandpass(int order, double low_hz, double high_hz, double fs_hz) {
  const double nyq = fs_hz / 2.0;
  if (fs_hz <= 0.0) throw InvalidParameterError("design_bandpass: fs_hz must be positive");
  if (order < 1 || order > 12)
    throw InvalidParameterError("design_bandpass: order must be in [1, 12], got " +
                                std::to_string(order));
  if (low_hz <= 0.0)
    throw InvalidParameterError("design_bandpass: low_hz must be positive, got " +
                                std::to_string(low_hz));
  if (high_hz <= low_hz)
    throw InvalidParameterError("design_bandpass: high_hz (" + std::to_string(high_hz) +
                                ") must exceed low_hz (" + std::to_string(low_hz) + ")");
  if (high_hz >= nyq)
    throw InvalidParameterError("design_bandpass: high_hz (" + std::to_string(high_hz) +
                                ") must be below the Nyquist frequency (" + std::to_string(nyq) +
                                ")");

  // Prewarped analog edges (bilinear s = (z-1)/(z+1) maps w <-> tan(pi f/fs)).
  const double w1 = std::tan(M_PI * low_hz / fs_hz);
  const double w2 = std::tan(M_PI * high_hz / fs_hz);
  const double bw = w2 - w1;
  const double w0sq = w1 * w2;

  // Analog Butterworth lowpass prototype poles (left half-plane), then the
  // lowpass->bandpass transform s -> (s^2 + w0^2) / (bw * s). Each prototype
  // pole yields two bandpass poles.
  std::vector<cplx> poles;
  poles.reserve(static_cast<std::size_t>(2 * order));
  for (int k = 0; k < order; ++k) {
    const double theta = M_PI * (2.0 * k + 1.0) / (2.0 * order) + M_PI / 2.0;
    const cplx p(std::cos(theta), std::sin(theta));
    const cplx pb = p * (bw / 2.0);
    const cplx disc = std::sqrt(pb * pb - w0sq);
    poles.push_back(pb + disc);
    poles.push_back(pb - disc);
  }

  // Bilinear transform of poles; zeros are order x {z=+1} and order x {z=-1},
  // giving every section the numerator (1 - z^-2).
  std::vector<cplx> zpoles;
  zpoles.reserve(poles.size());
  for (const auto& p : poles) zpoles.push_back((1.0 + p) / (1.0 - p));

  // Group into conjugate pairs (real-coefficient sections). Real poles are
  // paired with each other.
  std::vector<cplx> complex_ones;
  std::vector<double> real_ones;
  const double imag_tol = 1e-12;
  for (const auto& zp : zpoles) {
    if (zp.imag() > imag_tol)
      complex_ones.push_back(zp);
    else if (zp.imag() < -imag_tol)
      ;  // conjugate partner of one in complex_ones
    else
      real_ones.push_back(zp.real());
  }
  std::sort(complex_ones.begin(), complex_ones.end(), [](const cplx& a, const cplx& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  std::sort(real_ones.begin(), real_ones.end());
  if (complex_ones.size() * 2 + real_ones.size() != zpoles.size() || real_ones.size() % 2 != 0)
    throw DesignFailureError("design_bandpass: pole pairing failed");

  SosFilter filt;
  for (const auto& zp : complex_ones) {
    Biquad s;
    s.b0 = 1.0;
    s.b1 = 0.0;
    s.b2 = -1.0;
    s.a1 = -2.0 * zp.real();
    s.a2 = std::norm(zp);
    filt.sections.push_back(s);
  }
  for (std::size_t i = 0; i + 1 < real_ones.size(); i += 2) {
    Biquad s;
    s.b0 = 1.0;
    s.b1 = 0.0;
    s.b2 = -1.0;
    s.a1 = -(real_ones[i] + real_ones[i + 1]);
    s.a2 = real_ones[i] * real_ones[i + 1];
    filt.sections.push_back(s);
  }

  // Normalize overall gain to exactly 1 at the (digital) center frequency,
  // distributing the gain evenly across sections.
  const double w_center = 2.0 * std::atan(std::sqrt(w0sq));
  const double g = sos_mag(filt, w_center);
  if (!(g > 0.0) || !std::isfinite(g))
    throw DesignFailureError("design_bandpass: degenerate center-frequency gain");
  const double per_section = std::pow(1.0 / g, 1.0 / static_cast<double>(filt.sections.size()));
  for (auto& s : filt.sections) {
    s.b0 *= per_section;
    s.b1 *= per_section;
    s.b2 *= per_section;
  }

  for (const auto& s : filt.sections) {
    if (!s.stable() || !std::isfinite(s.a1) || !std::isfinite(s.a2))
      throw DesignFailureError("design_bandpass: unstable section in the designed filter");
  }

  std::ostringstream desc;
  desc << "butterworth bandpass order=" << order << " low=" << low_hz << " high=" << high_hz
       << " fs=" << fs_hz;
  filt.description = desc.str();
  return filt;
}

SosFilter design_notch(double center_hz, double q, double fs_hz) {
  const double nyq = fs_hz / 2.0;
  if (fs_hz <= 0.0) throw InvalidParameterError("design_notch: fs_hz must be positive");
  if (q <= 0.0) throw InvalidParameterError("design_notch: q must be positive");
  if (center_hz <= 0.0 || center_hz >= nyq)
    throw InvalidParameterError("design_notch: center_hz (" + std::to_string(center_hz) +
                                ") must lie in (0, Nyquist=" + std::to_string(nyq) + ")");

  const double w0 = 2.0 * M_PI * center_hz / fs_hz;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double a0 = 1.0 + alpha;

  Biquad s;
  s.b0 = 1.0 / a0;
  s.b1 = -2.0 * std::cos(w0) / a0;
  s.b2 = 1.0 / a0;
  s.a1 = -2.0 * std::cos(w0) / a0;
  s.a2 = (1.0 - alpha) / a0;
  if (!s.stable()) throw DesignFailureError("design_notch: unstable section");

  SosFilter filt;
  filt.sections.push_back(s);
  std::ostringstream desc;
  desc << "notch center=" << center_hz << " q=" << q << " fs=" << fs_hz;
  filt.description = desc.str();
  return filt;
}

namespace {

// Steady-state DF2T state for a unit-step input, scaled by the actual edge
// sample at run time. Keeps the forward pass free of startup transients.
struct SectionState {
  double z1_unit = 0.0;
  double z2_unit = 0.0;
  double dc_gain = 1.0;
};

std::vector<SectionState> steady_states(const SosFilter& f) {
  std::vector<SectionState> states;
  states.reserve(f.sections.size());
  for (const auto& s : f.sections) {
    SectionState st;
    const double denom = 1.0 + s.a1 + s.a2;
    st.dc_gain = (s.b0 + s.b1 + s.b2) / denom;
    st.z2_unit = s.b2 - s.a2 * st.dc_gain;
    st.z1_unit = s.b1 - s.a1 * st.dc_gain + st.z2_unit;
    states.push_back(st);
  }
  return states;
}

void sos_forward(const SosFilter& f, const std::vector<SectionState>& states,
                 std::vector<double>& x) {
  double edge = x.empty() ? 0.0 : x.front();
  for (std::size_t si = 0; si < f.sections.size(); ++si) {
    const Biquad& s = f.sections[si];
    double z1 = states[si].z1_unit * edge;
    double z2 = states[si].z2_unit * edge;
    for (auto& v : x) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
    edge *= states[si].dc_gain;
  }
}

}  // namespace

std::vector<double> filtfilt_channel(const SosFilter& filter, const std::vector<double>& x) {
  const std::size_t pad = static_cast<std::size_t>(3 * filter.order());
  if (x.size() <= pad)
    throw LengthError("filtfilt: signal length " + std::to_string(x.size()) +
                      " must exceed 3 x filter order = " + std::to_string(pad));

  // Odd reflection about both endpoints.
  std::vector<double> ext;
  ext.reserve(x.size() + 2 * pad);
  for (std::size_t i = 0; i < pad; ++i) ext.push_back(2.0 * x.front() - x[pad - i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 0; i < pad; ++i) ext.push_back(2.0 * x.back() - x[x.size() - 2 - i]);

  const auto states = steady_states(filter);
  sos_forward(filter, states, ext);
  std::reverse(ext.begin(), ext.end());
  sos_forward(filter, states, ext);
  std::reverse(ext.begin(), ext.end());

  return std::vector<double>(ext.begin() + static_cast<std::ptrdiff_t>(pad),
                             ext.begin() + static_cast<std::ptrdiff_t>(pad + x.size()));
}

Recording filtfilt(const SosFilter& filter, const Recording& rec) {
  Recording out;
  out.fs_hz = rec.fs_hz;
  out.channel_names = rec.channel_names;
  out.samples.resize(rec.n_channels(), rec.n_samples());
  const auto n_samples = static_cast<std::size_t>(rec.n_samples());
  parallel_for(static_cast<std::size_t>(rec.n_channels()), [&](std::size_t c) {
    std::vector<double> x(n_samples);
    for (std::size_t t = 0; t < n_samples; ++t)
      x[t] = rec.samples(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(t));
    const auto y = filtfilt_channel(filter, x);
    for (std::size_t t = 0; t < n_samples; ++t)
      out.samples(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(t)) = y[t];
  });
  return out;
}

}  // namespace nse
