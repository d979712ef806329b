#include "nse/synthgen.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "nse/errors.hpp"
#include "nse/fft.hpp"
#include "nse/parallel.hpp"
#include "nse/rng.hpp"

namespace nse {

namespace {

void normalize_unit_variance(std::vector<double>& x) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= static_cast<double>(x.size());
  const double inv = var > 0.0 ? 1.0 / std::sqrt(var) : 0.0;
  for (auto& v : x) v = (v - mean) * inv;
}

// Two independent pink channels from one complex inverse FFT: Hermitian
// spectra A and B give ifft(A + iB) = a + i b with a, b real.
void pink_noise_pair(std::size_t n, double alpha, uint64_t key_a, uint64_t key_b,
                     std::vector<double>& out_a, std::vector<double>& out_b) {
  const std::size_t nfft = next_pow2(n);
  std::vector<double> re(nfft, 0.0), im(nfft, 0.0);
  Rng rng_a(key_a), rng_b(key_b);
  for (std::size_t k = 1; k <= nfft / 2; ++k) {
    const double amp = std::pow(static_cast<double>(k), -alpha / 2.0);
    double ar, ai, br, bi;
    if (k == nfft / 2) {
      ar = amp * rng_a.normal();
      ai = 0.0;
      br = amp * rng_b.normal();
      bi = 0.0;
    } else {
      ar = amp * rng_a.normal();
      ai = amp * rng_a.normal();
      br = amp * rng_b.normal();
      bi = amp * rng_b.normal();
    }
    // C[k] = A[k] + i B[k]; C[nfft-k] = conj(A[k]) + i conj(B[k]).
    re[k] = ar - bi;
    im[k] = ai + br;
    re[nfft - k] = ar + bi;
    im[nfft - k] = br - ai;
  }
  fft_pow2(re, im, true);
  out_a.assign(re.begin(), re.begin() + static_cast<std::ptrdiff_t>(n));
  out_b.assign(im.begin(), im.begin() + static_cast<std::ptrdiff_t>(n));
  normalize_unit_variance(out_a);
  normalize_unit_variance(out_b);
}

Eigen::MatrixXd draw_directions(int n_classes, int n_channels, uint64_t key) {
  Eigen::MatrixXd dirs(n_classes, n_channels);
  Rng rng(key);
  const int max_attempts = 10000;
  for (int c = 0; c < n_classes; ++c) {
    bool placed = false;
    for (int attempt = 0; attempt < max_attempts && !placed; ++attempt) {
      Eigen::VectorXd v(n_channels);
      for (int i = 0; i < n_channels; ++i) v(i) = rng.normal();
      const double norm = v.norm();
      if (norm < 1e-12) continue;
      v /= norm;
      placed = true;
      for (int prev = 0; prev < c; ++prev) {
        if (std::abs(dirs.row(prev).dot(v.transpose())) >= 0.5) {
          placed = false;
          break;
        }
      }
      if (placed) dirs.row(c) = v.transpose();
    }
    if (!placed)
      throw ValidationError("synthgen: could not place " + std::to_string(n_classes) +
                            " directions with pairwise |cos| < 0.5 in " +
                            std::to_string(n_channels) + " channels");
  }
  return dirs;
}

constexpr uint64_t kStreamDirections = 1;
constexpr uint64_t kStreamMixing = 2;
constexpr uint64_t kStreamImagined = 3;
constexpr uint64_t kStreamSpoken = 4;
constexpr uint64_t kStreamSensor = 5;

Eigen::MatrixXd epoch_background(const SynthSpec& spec, uint64_t stream, std::size_t epoch_idx,
                                 std::size_t n_samples) {
  Eigen::MatrixXd epoch(spec.n_channels, static_cast<Eigen::Index>(n_samples));
  const uint64_t epoch_key = mix64(spec.seed, stream, epoch_idx);
  std::vector<double> a, b;
  for (int c = 0; c < spec.n_channels; c += 2) {
    pink_noise_pair(n_samples, spec.noise_alpha, mix64(epoch_key, 2 * c), mix64(epoch_key, 2 * c + 1),
                    a, b);
    for (std::size_t t = 0; t < n_samples; ++t)
      epoch(c, static_cast<Eigen::Index>(t)) = spec.noise_sigma * a[t];
    if (c + 1 < spec.n_channels) {
      for (std::size_t t = 0; t < n_samples; ++t)
        epoch(c + 1, static_cast<Eigen::Index>(t)) = spec.noise_sigma * b[t];
    }
  }
  return epoch;
}

Eigen::MatrixXd imagined_epoch(const SynthSpec& spec, const Eigen::MatrixXd& directions,
                               const std::vector<double>& boosts, uint64_t stream,
                               std::size_t epoch_idx, uint32_t label, std::size_t n_samples) {
  Eigen::MatrixXd epoch = epoch_background(spec, stream, epoch_idx, n_samples);
  const double boost = boosts[label];
  if (boost > 1.0) {
    const uint64_t epoch_key = mix64(spec.seed, stream, epoch_idx);
    std::vector<double> s, unused;
    pink_noise_pair(n_samples, spec.noise_alpha, mix64(epoch_key, 0xa11ce),
                    mix64(epoch_key, 0xb0b), s, unused);
    const double gain = spec.noise_sigma * std::sqrt(boost - 1.0);
    for (std::size_t t = 0; t < n_samples; ++t) {
      const double v = gain * s[t];
      for (int c = 0; c < spec.n_channels; ++c)
        epoch(c, static_cast<Eigen::Index>(t)) += directions(label, c) * v;
    }
  }
  return epoch;
}

}  // namespace

std::vector<double> pink_noise(std::size_t n, double alpha, uint64_t key) {
  std::vector<double> a, b;
  pink_noise_pair(n, alpha, key, mix64(key, 0x5eed), a, b);
  return a;
}

void SynthSpec::validate() const {
  if (n_channels < 1) throw ValidationError("SynthSpec: n_channels must be >= 1");
  if (n_classes < 1) throw ValidationError("SynthSpec: n_classes must be >= 1");
  if (trials_per_class < 1) throw ValidationError("SynthSpec: trials_per_class must be >= 1");
  if (fs_hz <= 0.0 || epoch_seconds <= 0.0)
    throw ValidationError("SynthSpec: fs_hz and epoch_seconds must be positive");
  if (noise_sigma <= 0.0) throw ValidationError("SynthSpec: noise_sigma must be positive");
  if (noise_alpha < 0.0) throw ValidationError("SynthSpec: noise_alpha must be >= 0");
  if (shift_epsilon < 0.0) throw ValidationError("SynthSpec: shift_epsilon must be >= 0");
  if (shift_noise_sigma < 0.0) throw ValidationError("SynthSpec: shift_noise_sigma must be >= 0");
  if (!boosts.empty() && static_cast<int>(boosts.size()) != n_classes)
    throw ValidationError("SynthSpec: boosts must have one entry per class");
  for (double b : boosts)
    if (b < 1.0) throw ValidationError("SynthSpec: boosts must be >= 1");
  if (planted_directions.size() != 0) {
    if (planted_directions.rows() != n_classes || planted_directions.cols() != n_channels)
      throw ValidationError("SynthSpec: planted_directions must be n_classes x n_channels");
    for (int c = 0; c < n_classes; ++c) {
      if (std::abs(planted_directions.row(c).norm() - 1.0) > 1e-6)
        throw ValidationError("SynthSpec: planted direction " + std::to_string(c) +
                              " is not unit norm");
      for (int p = 0; p < c; ++p) {
        if (std::abs(planted_directions.row(c).dot(planted_directions.row(p))) >= 0.5)
          throw ValidationError("SynthSpec: planted directions " + std::to_string(p) + " and " +
                                std::to_string(c) + " have |cos| >= 0.5");
      }
    }
  }
}

SynthData generate(const SynthSpec& spec) {
  spec.validate();
  const auto n_samples = static_cast<std::size_t>(std::llround(spec.epoch_seconds * spec.fs_hz));
  if (n_samples < 2) throw ValidationError("SynthSpec: epochs shorter than two samples");

  SynthData data;
  data.truth.seed = spec.seed;
  data.truth.boosts = spec.boosts.empty() ? std::vector<double>(spec.n_classes, 6.0) : spec.boosts;
  data.truth.directions = spec.planted_directions.size() != 0
                              ? spec.planted_directions
                              : draw_directions(spec.n_classes, spec.n_channels,
                                                mix64(spec.seed, kStreamDirections));

  // Mixing perturbation I + eps * R with R scaled to unit spectral norm.
  Eigen::MatrixXd r(spec.n_channels, spec.n_channels);
  {
    Rng rng(mix64(spec.seed, kStreamMixing));
    for (int i = 0; i < spec.n_channels; ++i)
      for (int j = 0; j < spec.n_channels; ++j) r(i, j) = rng.normal();
    const double top = r.jacobiSvd().singularValues()(0);
    if (top > 0.0) r /= top;
  }
  data.truth.mixing_perturbation =
      Eigen::MatrixXd::Identity(spec.n_channels, spec.n_channels) + spec.shift_epsilon * r;

  const std::size_t n_epochs =
      static_cast<std::size_t>(spec.n_classes) * static_cast<std::size_t>(spec.trials_per_class);

  auto init_set = [&](EpochSet& set, Domain domain) {
    set.fs_hz = spec.fs_hz;
    set.epochs.resize(n_epochs);
    set.labels.resize(n_epochs);
    set.domains.assign(n_epochs, domain);
    for (std::size_t k = 0; k < n_epochs; ++k)
      set.labels[k] = static_cast<uint32_t>(k / static_cast<std::size_t>(spec.trials_per_class));
  };
  init_set(data.imagined, Domain::imagined);
  init_set(data.spoken, Domain::spoken);

  parallel_for(n_epochs, [&](std::size_t k) {
    const uint32_t label = data.imagined.labels[k];
    data.imagined.epochs[k] = imagined_epoch(spec, data.truth.directions, data.truth.boosts,
                                             kStreamImagined, k, label, n_samples);
  });
  parallel_for(n_epochs, [&](std::size_t k) {
    const uint32_t label = data.spoken.labels[k];
    Eigen::MatrixXd base = imagined_epoch(spec, data.truth.directions, data.truth.boosts,
                                          kStreamSpoken, k, label, n_samples);
    Eigen::MatrixXd shifted = data.truth.mixing_perturbation * base;
    if (spec.shift_noise_sigma > 0.0) {
      Rng rng(mix64(spec.seed, kStreamSensor, k));
      for (std::size_t t = 0; t < n_samples; ++t)
        for (int c = 0; c < spec.n_channels; ++c)
          shifted(c, static_cast<Eigen::Index>(t)) += spec.shift_noise_sigma * rng.normal();
    }
    data.spoken.epochs[k] = std::move(shifted);
  });
  return data;
}

std::pair<Recording, EventList> epochs_to_recording(const EpochSet& set, double gap_seconds,
                                                    double noise_alpha, double noise_sigma,
                                                    uint64_t seed) {
  set.validate();
  if (set.n_epochs() == 0) throw ValidationError("epochs_to_recording: empty epoch set");
  if (gap_seconds < 0.0) throw ValidationError("epochs_to_recording: gap must be >= 0");

  const auto gap_len = static_cast<Eigen::Index>(std::llround(gap_seconds * set.fs_hz));
  const auto epoch_len = set.n_samples_per_epoch();
  const auto n_ch = set.n_channels();
  const auto stride = gap_len + epoch_len;

  Recording rec;
  rec.fs_hz = set.fs_hz;
  for (Eigen::Index c = 0; c < n_ch; ++c) {
    char name[16];
    std::snprintf(name, sizeof(name), "ch%03d", static_cast<int>(c));
    rec.channel_names.emplace_back(name);
  }
  rec.samples.resize(n_ch, static_cast<Eigen::Index>(set.n_epochs()) * stride);

  EventList events;
  constexpr uint64_t kStreamGap = 6;
  std::vector<double> a, b;
  for (std::size_t k = 0; k < set.n_epochs(); ++k) {
    const auto base = static_cast<Eigen::Index>(k) * stride;
    if (gap_len > 0) {
      const uint64_t gap_key = mix64(seed, kStreamGap, k);
      for (Eigen::Index c = 0; c < n_ch; c += 2) {
        pink_noise_pair(static_cast<std::size_t>(gap_len), noise_alpha, mix64(gap_key, 2 * c),
                        mix64(gap_key, 2 * c + 1), a, b);
        for (Eigen::Index t = 0; t < gap_len; ++t) {
          rec.samples(c, base + t) = noise_sigma * a[static_cast<std::size_t>(t)];
          if (c + 1 < n_ch)
            rec.samples(c + 1, base + t) = noise_sigma * b[static_cast<std::size_t>(t)];
        }
      }
    }
    rec.samples.middleCols(base + gap_len, epoch_len) = set.epochs[k];
    events.events.push_back({base + gap_len, set.labels[k]});
  }
  return {std::move(rec), std::move(events)};
}

void write_synth_truth(const std::string& path, const SynthTruth& truth) {
  nlohmann::json j;
  j["seed"] = truth.seed;
  j["boosts"] = truth.boosts;
  auto matrix_to_json = [](const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
      rows.push_back(std::move(row));
    }
    return rows;
  };
  j["directions"] = matrix_to_json(truth.directions);
  j["mixing_perturbation"] = matrix_to_json(truth.mixing_perturbation);
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << j.dump() << '\n';
}

SynthTruth read_synth_truth(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("'" + path + "': " + std::string(e.what()));
  }
  auto matrix_from_json = [&](const nlohmann::json& rows) {
    if (!rows.is_array() || rows.empty()) throw ParseError("'" + path + "': bad matrix field");
    Eigen::MatrixXd m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t k = 0; k < rows[i].size(); ++k)
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k].get<double>();
    return m;
  };
  SynthTruth truth;
  try {
    truth.seed = j.at("seed").get<uint64_t>();
    truth.boosts = j.at("boosts").get<std::vector<double>>();
    truth.directions = matrix_from_json(j.at("directions"));
    truth.mixing_perturbation = matrix_from_json(j.at("mixing_perturbation"));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("'" + path + "': " + std::string(e.what()));
  }
  return truth;
}

ArtifactMixture generate_artifact_mixture(uint64_t seed, int n_channels, int n_sources,
                                          double duration_seconds, double fs_hz) {
  if (n_sources < 1) throw ValidationError("generate_artifact_mixture: n_sources must be >= 1");
  if (n_sources > n_channels)
    throw ValidationError("generate_artifact_mixture: n_sources must not exceed n_channels");
  const auto n = static_cast<std::size_t>(std::llround(duration_seconds * fs_hz));
  if (n < 16) throw ValidationError("generate_artifact_mixture: duration too short");

  ArtifactMixture mix;
  mix.sources.resize(n_sources, static_cast<Eigen::Index>(n));
  mix.blink_source_index = n_sources - 1;

  // Deterministic non-Gaussian waveforms at non-harmonic frequencies; the
  // last source is a blink-like train of low-frequency bumps.
  const double freqs[] = {6.5, 9.7, 13.3, 17.9, 23.1, 29.5};
  Rng rng(mix64(seed, 0x50a3ce5));
  for (int s = 0; s + 1 < n_sources; ++s) {
    const double f = freqs[s % 6] * (1.0 + 0.1 * (s / 6));
    const double phase = rng.uniform() * 2.0 * M_PI;
    std::vector<double> wave(n);
    for (std::size_t t = 0; t < n; ++t) {
      const double arg = 2.0 * M_PI * f * static_cast<double>(t) / fs_hz + phase;
      switch (s % 3) {
        case 0: wave[t] = std::sin(arg); break;
        case 1: wave[t] = std::sin(arg) >= 0.0 ? 1.0 : -1.0; break;           // square
        default: wave[t] = 2.0 * (arg / (2.0 * M_PI) - std::floor(arg / (2.0 * M_PI) + 0.5)); break;  // saw
      }
    }
    normalize_unit_variance(wave);
    for (std::size_t t = 0; t < n; ++t) mix.sources(s, static_cast<Eigen::Index>(t)) = wave[t];
  }
  {
    // Blink bumps roughly every 1.5-3 s, ~150 ms wide.
    std::vector<double> blink(n, 0.0);
    Rng brng(mix64(seed, 0xb111c));
    double t_next = 0.5 + brng.uniform();
    const double width = 0.075;
    while (t_next < duration_seconds - 0.5) {
      const std::size_t center = static_cast<std::size_t>(t_next * fs_hz);
      const auto span = static_cast<std::ptrdiff_t>(4.0 * width * fs_hz);
      for (std::ptrdiff_t dt = -span; dt <= span; ++dt) {
        const std::ptrdiff_t idx = static_cast<std::ptrdiff_t>(center) + dt;
        if (idx < 0 || idx >= static_cast<std::ptrdiff_t>(n)) continue;
        const double x = static_cast<double>(dt) / (width * fs_hz);
        blink[static_cast<std::size_t>(idx)] += std::exp(-0.5 * x * x);
      }
      t_next += 1.5 + 1.5 * brng.uniform();
    }
    normalize_unit_variance(blink);
    for (std::size_t t = 0; t < n; ++t)
      mix.sources(n_sources - 1, static_cast<Eigen::Index>(t)) = blink[t];
  }

  // Seeded full-rank mixing.
  Rng mrng(mix64(seed, 0x301c));
  for (;;) {
    mix.mixing.resize(n_channels, n_sources);
    for (int i = 0; i < n_channels; ++i)
      for (int s = 0; s < n_sources; ++s) mix.mixing(i, s) = mrng.normal();
    const auto sv = mix.mixing.jacobiSvd().singularValues();
    if (sv(sv.size() - 1) > 1e-6 * sv(0)) break;
  }

  mix.mixed.fs_hz = fs_hz;
  for (int c = 0; c < n_channels; ++c) {
    char name[16];
    std::snprintf(name, sizeof(name), "ch%02d", c);
    mix.mixed.channel_names.emplace_back(name);
  }
  mix.mixed.samples = mix.mixing * mix.sources;

  mix.references.fs_hz = fs_hz;
  mix.references.channel_names = {"EOG"};
  mix.references.samples = mix.sources.row(n_sources - 1);
  return mix;
}

}  // namespace nse
