#include "nse/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "nse/errors.hpp"

namespace nse {

void PipelineConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ValidationError("config: " + msg); };

  if (fs_hz <= 0.0) fail("fs_hz must be positive");
  const double nyq = fs_hz / 2.0;
  if (!(band_low_hz > 0.0 && band_low_hz < band_high_hz && band_high_hz < nyq))
    fail("band edges must satisfy 0 < low < high < fs/2");
  if (band_order < 1 || band_order > 12) fail("band_order must be in [1, 12]");
  for (double f : notch_hz)
    if (f <= 0.0 || f >= nyq) fail("notch frequency " + std::to_string(f) + " outside (0, fs/2)");
  if (notch_q <= 0.0) fail("notch_q must be positive");
  if (epoch_seconds <= 0.0) fail("epoch_seconds must be positive");
  if (baseline_seconds <= 0.0) fail("baseline_seconds must be positive");

  const auto epoch_samples = static_cast<long long>(std::llround(epoch_seconds * fs_hz));
  if (n_windows < 1) fail("n_windows must be >= 1");
  if (2LL * n_windows > epoch_samples)
    fail("n_windows x 2 must not exceed the epoch sample count (" +
         std::to_string(epoch_samples) + ")");
  if (!(embed_eps > 0.0)) fail("embed_eps must be positive");

  if (!(ica_threshold > 0.0 && ica_threshold <= 1.0)) fail("ica_threshold must be in (0, 1]");
  if (ica_max_iterations < 1) fail("ica_max_iterations must be >= 1");
  if (!(ica_tolerance > 0.0)) fail("ica_tolerance must be positive");
  if (ica_components < 0) fail("ica_components must be >= 0");

  if (patterns_per_class < 2 || patterns_per_class % 2 != 0)
    fail("patterns_per_class must be even and >= 2");
  if (csp_ridge < 0.0) fail("csp_ridge must be >= 0");

  if (!(erd_low_hz > 0.0 && erd_low_hz < erd_high_hz && erd_high_hz < nyq))
    fail("erd range must satisfy 0 < low < high < fs/2");
  if (erd_band_width_hz <= 0.0) fail("erd_band_width_hz must be positive");
  if (erd_bin_seconds <= 0.0 || erd_bin_seconds > epoch_seconds)
    fail("erd_bin_seconds must be in (0, epoch_seconds]");

  if (tsne.perplexity < 1.0) fail("tsne.perplexity must be >= 1");
  if (tsne.iterations < 1) fail("tsne.iterations must be >= 1");
  if (tsne_max_points < 4) fail("tsne_max_points must be >= 4");

  if (synth_channels < 1 || synth_classes < 1 || synth_trials_per_class < 1)
    fail("synth geometry must be positive");
  if (synth_boost < 1.0) fail("synth_boost must be >= 1");
  if (synth_sigma <= 0.0) fail("synth_sigma must be positive");
  if (synth_shift_epsilon < 0.0) fail("synth_shift_epsilon must be >= 0");
  if (synth_shift_noise_sigma < 0.0) fail("synth_shift_noise_sigma must be >= 0");
  if (audio_target_hz <= 0) fail("audio_target_hz must be positive");
  if (threads < 0) fail("threads must be >= 0");
}

namespace {

template <typename T>
void maybe(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

void apply_config_json(PipelineConfig& c, const std::string& json_text,
                       const std::string& origin) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(origin + ": " + std::string(e.what()));
  }
  try {
    maybe(j, "fs_hz", c.fs_hz);
    maybe(j, "band_low_hz", c.band_low_hz);
    maybe(j, "band_high_hz", c.band_high_hz);
    maybe(j, "band_order", c.band_order);
    maybe(j, "notch_hz", c.notch_hz);
    maybe(j, "notch_q", c.notch_q);
    maybe(j, "epoch_seconds", c.epoch_seconds);
    maybe(j, "baseline_seconds", c.baseline_seconds);
    maybe(j, "ica_threshold", c.ica_threshold);
    maybe(j, "ica_max_iterations", c.ica_max_iterations);
    maybe(j, "ica_tolerance", c.ica_tolerance);
    maybe(j, "ica_components", c.ica_components);
    maybe(j, "patterns_per_class", c.patterns_per_class);
    maybe(j, "csp_ridge", c.csp_ridge);
    maybe(j, "n_windows", c.n_windows);
    maybe(j, "embed_eps", c.embed_eps);
    maybe(j, "erd_band_width_hz", c.erd_band_width_hz);
    maybe(j, "erd_bin_seconds", c.erd_bin_seconds);
    maybe(j, "erd_low_hz", c.erd_low_hz);
    maybe(j, "erd_high_hz", c.erd_high_hz);
    if (j.contains("tsne")) {
      const auto& t = j.at("tsne");
      maybe(t, "perplexity", c.tsne.perplexity);
      maybe(t, "iterations", c.tsne.iterations);
      maybe(t, "learning_rate", c.tsne.learning_rate);
      maybe(t, "early_exaggeration", c.tsne.early_exaggeration);
      maybe(t, "exaggeration_iterations", c.tsne.exaggeration_iterations);
      maybe(t, "momentum_initial", c.tsne.momentum_initial);
      maybe(t, "momentum_final", c.tsne.momentum_final);
      maybe(t, "momentum_switch_iteration", c.tsne.momentum_switch_iteration);
    }
    maybe(j, "tsne_max_points", c.tsne_max_points);
    maybe(j, "synth_channels", c.synth_channels);
    maybe(j, "synth_classes", c.synth_classes);
    maybe(j, "synth_trials_per_class", c.synth_trials_per_class);
    maybe(j, "synth_boost", c.synth_boost);
    maybe(j, "synth_alpha", c.synth_alpha);
    maybe(j, "synth_sigma", c.synth_sigma);
    maybe(j, "synth_shift_epsilon", c.synth_shift_epsilon);
    maybe(j, "synth_shift_noise_sigma", c.synth_shift_noise_sigma);
    maybe(j, "audio_target_hz", c.audio_target_hz);
    maybe(j, "seed", c.seed);
    maybe(j, "threads", c.threads);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(origin + ": bad config field: " + std::string(e.what()));
  }
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::stringstream buf;
  buf << in.rdbuf();
  PipelineConfig config;
  apply_config_json(config, buf.str(), "'" + path + "'");
  config.validate();
  return config;
}

void save_config(const std::string& path, const PipelineConfig& c) {
  nlohmann::json j;
  j["fs_hz"] = c.fs_hz;
  j["band_low_hz"] = c.band_low_hz;
  j["band_high_hz"] = c.band_high_hz;
  j["band_order"] = c.band_order;
  j["notch_hz"] = c.notch_hz;
  j["notch_q"] = c.notch_q;
  j["epoch_seconds"] = c.epoch_seconds;
  j["baseline_seconds"] = c.baseline_seconds;
  j["ica_threshold"] = c.ica_threshold;
  j["ica_max_iterations"] = c.ica_max_iterations;
  j["ica_tolerance"] = c.ica_tolerance;
  j["ica_components"] = c.ica_components;
  j["patterns_per_class"] = c.patterns_per_class;
  j["csp_ridge"] = c.csp_ridge;
  j["n_windows"] = c.n_windows;
  j["embed_eps"] = c.embed_eps;
  j["erd_band_width_hz"] = c.erd_band_width_hz;
  j["erd_bin_seconds"] = c.erd_bin_seconds;
  j["erd_low_hz"] = c.erd_low_hz;
  j["erd_high_hz"] = c.erd_high_hz;
  j["tsne"] = {{"perplexity", c.tsne.perplexity},
               {"iterations", c.tsne.iterations},
               {"learning_rate", c.tsne.learning_rate},
               {"early_exaggeration", c.tsne.early_exaggeration},
               {"exaggeration_iterations", c.tsne.exaggeration_iterations},
               {"momentum_initial", c.tsne.momentum_initial},
               {"momentum_final", c.tsne.momentum_final},
               {"momentum_switch_iteration", c.tsne.momentum_switch_iteration}};
  j["tsne_max_points"] = c.tsne_max_points;
  j["synth_channels"] = c.synth_channels;
  j["synth_classes"] = c.synth_classes;
  j["synth_trials_per_class"] = c.synth_trials_per_class;
  j["synth_boost"] = c.synth_boost;
  j["synth_alpha"] = c.synth_alpha;
  j["synth_sigma"] = c.synth_sigma;
  j["synth_shift_epsilon"] = c.synth_shift_epsilon;
  j["synth_shift_noise_sigma"] = c.synth_shift_noise_sigma;
  j["audio_target_hz"] = c.audio_target_hz;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
}

}  // namespace nse
