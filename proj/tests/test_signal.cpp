#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "nse/errors.hpp"
#include "nse/fft.hpp"
#include "nse/filters.hpp"
#include "nse/recording.hpp"
#include "nse/rng.hpp"
#include "nse/segmentation.hpp"
#include "nse/welch.hpp"
#include "oracles.hpp"

using namespace nse;

namespace {

std::vector<std::array<double, 5>> as_arrays(const SosFilter& f) {
  std::vector<std::array<double, 5>> out;
  for (const auto& s : f.sections) out.push_back({s.b0, s.b1, s.b2, s.a1, s.a2});
  return out;
}

Recording single_channel(double fs, std::vector<double> samples) {
  Recording rec;
  rec.fs_hz = fs;
  rec.channel_names = {"ch0"};
  rec.samples.resize(1, static_cast<Eigen::Index>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i)
    rec.samples(0, static_cast<Eigen::Index>(i)) = samples[i];
  return rec;
}

std::vector<double> channel_vec(const Recording& rec, int c = 0) {
  std::vector<double> out(static_cast<std::size_t>(rec.n_samples()));
  for (Eigen::Index t = 0; t < rec.n_samples(); ++t) out[static_cast<std::size_t>(t)] = rec.samples(c, t);
  return out;
}

}  // namespace

TEST_CASE("fft matches a naive DFT and round-trips") {
  Rng rng(42);
  for (std::size_t n : {1u, 2u, 4u, 8u, 64u, 256u, 1024u}) {
    std::vector<double> re(n), im(n);
    for (std::size_t i = 0; i < n; ++i) {
      re[i] = rng.normal();
      im[i] = rng.normal();
    }
    std::vector<double> want_re, want_im;
    oracle::dft_naive(re, im, want_re, want_im, false);

    auto got_re = re, got_im = im;
    fft_pow2(got_re, got_im, false);
    for (std::size_t k = 0; k < n; ++k) {
      CHECK(got_re[k] == doctest::Approx(want_re[k]).epsilon(1e-9).scale(1.0));
      CHECK(got_im[k] == doctest::Approx(want_im[k]).epsilon(1e-9).scale(1.0));
    }

    fft_pow2(got_re, got_im, true);
    for (std::size_t k = 0; k < n; ++k) {
      CHECK(got_re[k] == doctest::Approx(re[k]).epsilon(1e-10).scale(1.0));
      CHECK(got_im[k] == doctest::Approx(im[k]).epsilon(1e-10).scale(1.0));
    }
  }
  std::vector<double> re(3), im(3);
  CHECK_THROWS(fft_pow2(re, im, false));
}

TEST_CASE("bandpass design: band edges at -3.0103 dB, passband and stopband") {
  const auto filt = design_bandpass(5, 30.0, 120.0, 1000.0);
  CHECK(filt.n_sections() == 5);
  const auto sections = as_arrays(filt);

  const double edge_db_low = oracle::db(oracle::sos_magnitude(sections, 30.0, 1000.0));
  const double edge_db_high = oracle::db(oracle::sos_magnitude(sections, 120.0, 1000.0));
  CHECK(edge_db_low == doctest::Approx(-3.0103).epsilon(0.0).scale(1.0).epsilon(0.05 / 3.0103));
  CHECK(edge_db_high == doctest::Approx(-3.0103).scale(1.0).epsilon(0.05 / 3.0103));

  // In-band gain near unity at 60 Hz.
  CHECK(oracle::db(oracle::sos_magnitude(sections, 60.0, 1000.0)) >= -0.5);
  CHECK(oracle::db(oracle::sos_magnitude(sections, 60.0, 1000.0)) <= 0.01);

  // Stability: every section's poles strictly inside the unit circle.
  for (const auto& s : filt.sections) CHECK(s.stable());
}

TEST_CASE("bandpass design: order arithmetic and parameter errors") {
  const auto filt = design_bandpass(1, 10.0, 20.0, 100.0);
  CHECK(filt.n_sections() == 1);  // one analog order = one biquad pair
  CHECK(filt.sections.front().stable());

  CHECK_THROWS_AS(design_bandpass(5, 30.0, 500.0, 1000.0), InvalidParameterError);
  CHECK_THROWS_AS(design_bandpass(5, 30.0, 600.0, 1000.0), InvalidParameterError);
  CHECK_THROWS_AS(design_bandpass(5, -1.0, 120.0, 1000.0), InvalidParameterError);
  CHECK_THROWS_AS(design_bandpass(5, 120.0, 30.0, 1000.0), InvalidParameterError);
  CHECK_THROWS_AS(design_bandpass(0, 30.0, 120.0, 1000.0), InvalidParameterError);
  CHECK_THROWS_AS(design_bandpass(13, 30.0, 120.0, 1000.0), InvalidParameterError);

  // The error message names the offending edge.
  try {
    design_bandpass(5, 30.0, 600.0, 1000.0);
    FAIL("expected InvalidParameterError");
  } catch (const InvalidParameterError& e) {
    CHECK(std::string(e.what()).find("high_hz") != std::string::npos);
  }
}

TEST_CASE("notch design: null depth, unity DC and Nyquist gain") {
  const auto filt = design_notch(60.0, 30.0, 1000.0);
  CHECK(filt.n_sections() == 1);
  const auto sections = as_arrays(filt);

  CHECK(oracle::db(oracle::sos_magnitude(sections, 60.0, 1000.0)) <= -40.0);
  CHECK(oracle::sos_magnitude(sections, 0.0, 1000.0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(oracle::sos_magnitude(sections, 500.0, 1000.0) == doctest::Approx(1.0).epsilon(1e-6));

  const auto harmonic = design_notch(120.0, 30.0, 1000.0);
  CHECK(oracle::db(oracle::sos_magnitude(as_arrays(harmonic), 120.0, 1000.0)) <= -40.0);

  CHECK_THROWS_AS(design_notch(500.0, 30.0, 1000.0), InvalidParameterError);
  CHECK_THROWS_AS(design_notch(60.0, -1.0, 1000.0), InvalidParameterError);
}

TEST_CASE("filtfilt: zero phase on an in-band sinusoid") {
  const double fs = 1000.0;
  const auto filt = design_bandpass(5, 30.0, 120.0, fs);
  const std::size_t n = 4000;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::sin(2.0 * M_PI * 60.0 * static_cast<double>(i) / fs);

  const auto y = filtfilt_channel(filt, x);
  REQUIRE(y.size() == n);
  CHECK(oracle::xcorr_peak_lag(x, y, 8) == 0);
}

TEST_CASE("filtfilt: DC rejection through the bandpass") {
  const auto filt = design_bandpass(5, 30.0, 120.0, 1000.0);
  std::vector<double> x(4000, 1.0);
  const auto y = filtfilt_channel(filt, x);
  double max_abs = 0.0;
  for (double v : y) max_abs = std::max(max_abs, std::abs(v));
  CHECK(max_abs < 1e-3);
}

TEST_CASE("filtfilt: band-edge attenuation is the squared single-pass response") {
  const double fs = 1000.0;
  const auto filt = design_bandpass(5, 30.0, 120.0, fs);
  const std::size_t n = 20000;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::sin(2.0 * M_PI * 120.0 * static_cast<double>(i) / fs);
  const auto y = filtfilt_channel(filt, x);
  const double amp = oracle::fit_sine_amplitude(y, fs, 120.0, 2000);
  CHECK(oracle::db(amp) == doctest::Approx(-6.0206).scale(1.0).epsilon(0.1 / 6.0));
}

TEST_CASE("filtfilt: linearity") {
  const auto filt = design_bandpass(4, 20.0, 80.0, 500.0);
  Rng rng(7);
  const std::size_t n = 600;
  std::vector<double> x(n), y(n), mix(n);
  const double a = 1.7, b = -0.6;
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = rng.normal();
    y[i] = rng.normal();
    mix[i] = a * x[i] + b * y[i];
  }
  const auto fx = filtfilt_channel(filt, x);
  const auto fy = filtfilt_channel(filt, y);
  const auto fmix = filtfilt_channel(filt, mix);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double want = a * fx[i] + b * fy[i];
    num += (fmix[i] - want) * (fmix[i] - want);
    den += want * want;
  }
  CHECK(std::sqrt(num / den) < 1e-9);
}

TEST_CASE("filtfilt: notch kills narrowband power and leaves 10 Hz alone") {
  const double fs = 1000.0;
  const auto notch = design_notch(60.0, 30.0, fs);
  const std::size_t n = 1 << 17;
  Rng rng(11);
  std::vector<double> x(n);
  for (auto& v : x) v = rng.normal();
  const auto y = filtfilt_channel(notch, x);

  // Attenuation at the null, measured in a narrow band the notch actually
  // covers at q = 30 (+-0.2 Hz); a +-1 Hz average would dilute the null.
  const std::size_t seg = 8000;
  double in_power = 0.0, out_power = 0.0;
  for (double f : {59.875, 60.0, 60.125}) {
    in_power += oracle::narrowband_power(x, fs, f, seg);
    out_power += oracle::narrowband_power(y, fs, f, seg);
  }
  CHECK(oracle::db(std::sqrt(out_power / in_power)) <= -20.0);

  const double in_10 = oracle::narrowband_power(x, fs, 10.0, seg);
  const double out_10 = oracle::narrowband_power(y, fs, 10.0, seg);
  CHECK(std::abs(10.0 * std::log10(out_10 / in_10)) <= 0.5);
}

TEST_CASE("filtfilt: too-short signal raises a length error") {
  const auto filt = design_bandpass(5, 30.0, 120.0, 1000.0);
  std::vector<double> x(30, 0.0);  // 3 * order = 30 -> need more
  CHECK_THROWS_AS(filtfilt_channel(filt, x), LengthError);
}

TEST_CASE("filtfilt: multichannel output is channel-wise identical") {
  const auto filt = design_bandpass(3, 10.0, 40.0, 200.0);
  Rng rng(3);
  Recording rec;
  rec.fs_hz = 200.0;
  rec.channel_names = {"a", "b", "c"};
  rec.samples.resize(3, 400);
  for (Eigen::Index c = 0; c < 3; ++c)
    for (Eigen::Index t = 0; t < 400; ++t) rec.samples(c, t) = rng.normal();

  const Recording out = filtfilt(filt, rec);
  for (int c = 0; c < 3; ++c) {
    const auto single = filtfilt_channel(filt, channel_vec(rec, c));
    for (std::size_t t = 0; t < single.size(); ++t)
      CHECK(out.samples(c, static_cast<Eigen::Index>(t)) == single[t]);
  }
}

TEST_CASE("segment: shapes, empty list, out-of-range events") {
  Rng rng(5);
  Recording rec;
  rec.fs_hz = 1000.0;
  rec.channel_names = {"c0", "c1"};
  rec.samples.resize(2, 10000);
  for (Eigen::Index c = 0; c < 2; ++c)
    for (Eigen::Index t = 0; t < 10000; ++t) rec.samples(c, t) = rng.normal();

  EventList events;
  events.events = {{2000, 0}, {6000, 1}};
  const EpochSet set = segment(rec, events, 2.0, Domain::spoken);
  CHECK(set.n_epochs() == 2);
  CHECK(set.n_channels() == 2);
  CHECK(set.n_samples_per_epoch() == 2000);
  CHECK(set.labels[0] == 0);
  CHECK(set.labels[1] == 1);
  CHECK(set.domains[0] == Domain::spoken);

  // Bitwise round-trip against the source slices.
  for (Eigen::Index t = 0; t < 2000; ++t) {
    CHECK(set.epochs[0](0, t) == rec.samples(0, 2000 + t));
    CHECK(set.epochs[1](1, t) == rec.samples(1, 6000 + t));
  }

  const EpochSet empty = segment(rec, EventList{}, 2.0);
  CHECK(empty.n_epochs() == 0);

  EventList bad;
  bad.events = {{9500, 0}};
  CHECK_THROWS_AS(segment(rec, bad, 2.0), OutOfRangeError);
  try {
    segment(rec, bad, 2.0);
  } catch (const OutOfRangeError& e) {
    CHECK(std::string(e.what()).find("9500") != std::string::npos);
  }
}

TEST_CASE("baseline_correct: per-event means from the input signal") {
  // Constant channel: trials become zero.
  {
    auto rec = single_channel(1000.0, std::vector<double>(5000, 5.0));
    EventList ev;
    ev.events = {{1000, 0}};
    const auto out = baseline_correct(rec, ev, 0.5, 2.0);
    for (Eigen::Index t = 1000; t < 3000; ++t) CHECK(out.samples(0, t) == 0.0);
    // Outside the trial: untouched.
    CHECK(out.samples(0, 0) == 5.0);
    CHECK(out.samples(0, 4999) == 5.0);
  }
  // Baseline mean 2.0, trial value 3.0 -> corrected to 1.0.
  {
    std::vector<double> x(4000, 0.0);
    for (std::size_t i = 500; i < 1000; ++i) x[i] = 2.0;
    for (std::size_t i = 1000; i < 3000; ++i) x[i] = 3.0;
    auto rec = single_channel(1000.0, x);
    EventList ev;
    ev.events = {{1000, 0}};
    const auto out = baseline_correct(rec, ev, 0.5, 2.0);
    for (Eigen::Index t = 1000; t < 3000; ++t) CHECK(out.samples(0, t) == doctest::Approx(1.0));
  }
  // Two events, each corrected by its own baseline mean; the oracle
  // recomputes the per-event means independently.
  {
    Rng rng(9);
    std::vector<double> x(9000);
    for (auto& v : x) v = rng.normal();
    auto rec = single_channel(1000.0, x);
    EventList ev;
    ev.events = {{1000, 0}, {5000, 1}};
    const auto out = baseline_correct(rec, ev, 0.5, 2.0);
    for (const auto& e : ev.events) {
      double mean = 0.0;
      for (int64_t t = e.onset_sample - 500; t < e.onset_sample; ++t)
        mean += x[static_cast<std::size_t>(t)];
      mean /= 500.0;
      for (int64_t t = e.onset_sample; t < e.onset_sample + 2000; ++t)
        CHECK(out.samples(0, t) ==
              doctest::Approx(x[static_cast<std::size_t>(t)] - mean).epsilon(1e-12));
    }
  }
  // Onset earlier than the baseline window.
  {
    auto rec = single_channel(1000.0, std::vector<double>(4000, 1.0));
    EventList ev;
    ev.events = {{300, 0}};
    CHECK_THROWS_AS(baseline_correct(rec, ev, 0.5, 2.0), OutOfRangeError);
  }
}

TEST_CASE("EEGB container round-trip and truncation error") {
  Rng rng(13);
  Recording rec;
  rec.fs_hz = 250.0;
  rec.channel_names = {"Fz", "Cz", "Pz"};
  rec.samples.resize(3, 777);
  for (Eigen::Index c = 0; c < 3; ++c)
    for (Eigen::Index t = 0; t < 777; ++t)
      rec.samples(c, t) = static_cast<double>(static_cast<float>(rng.normal()));

  const auto dir = std::filesystem::temp_directory_path() / "nse_test_signal";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "rec.eegb").string();
  write_eegb(path, rec);

  const Recording back = read_eegb(path);
  CHECK(back.fs_hz == rec.fs_hz);
  CHECK(back.channel_names == rec.channel_names);
  REQUIRE(back.n_samples() == rec.n_samples());
  // f32 payload: values that are exactly representable round-trip bitwise.
  for (Eigen::Index c = 0; c < 3; ++c)
    for (Eigen::Index t = 0; t < 777; ++t) CHECK(back.samples(c, t) == rec.samples(c, t));

  // Truncated payload -> parse error with a byte offset.
  const auto trunc_path = (dir / "trunc.eegb").string();
  {
    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::ofstream out(trunc_path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
  }
  CHECK_THROWS_AS(read_eegb(trunc_path), ParseError);
  try {
    read_eegb(trunc_path);
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("byte offset") != std::string::npos);
  }
}

TEST_CASE("events CSV round-trip and validation") {
  const auto dir = std::filesystem::temp_directory_path() / "nse_test_signal";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "events.csv").string();

  EventList events;
  events.events = {{100, 3}, {2100, 0}, {4100, 12}};
  write_events_csv(path, events);
  const EventList back = read_events_csv(path);
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back.events[i].onset_sample == events.events[i].onset_sample);
    CHECK(back.events[i].label == events.events[i].label);
  }

  EventList decreasing;
  decreasing.events = {{200, 0}, {100, 1}};
  CHECK_THROWS_AS(decreasing.validate(), ValidationError);

  EventList out_of_vocab;
  out_of_vocab.events = {{100, 13}};
  out_of_vocab.n_classes = 13;
  CHECK_THROWS_AS(out_of_vocab.validate(), ValidationError);
}

TEST_CASE("welch PSD: white noise is flat, sine concentrates") {
  Rng rng(21);
  const double fs = 1000.0;
  std::vector<double> x(1 << 15);
  for (auto& v : x) v = rng.normal();
  const Psd psd = welch_psd(x, fs, 256);

  // Total power integrates to the variance, within a few percent.
  CHECK(band_power(psd, 0.0, 500.1) == doctest::Approx(1.0).epsilon(0.05));

  std::vector<double> tone(1 << 14);
  for (std::size_t i = 0; i < tone.size(); ++i)
    tone[i] = std::sin(2.0 * M_PI * 100.0 * static_cast<double>(i) / fs);
  const Psd tone_psd = welch_psd(tone, fs, 256);
  CHECK(band_power(tone_psd, 90.0, 110.0) == doctest::Approx(0.5).epsilon(0.02));
  CHECK(band_power(tone_psd, 200.0, 400.0) < 1e-6);
}
