#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nse/tsne.hpp"

namespace nse {

// Consolidated pipeline defaults. CLI flags override config-file values,
// which override these built-in defaults.
struct PipelineConfig {
  double fs_hz = 1000.0;

  // Preprocessing
  double band_low_hz = 30.0;
  double band_high_hz = 120.0;
  int band_order = 5;
  std::vector<double> notch_hz = {60.0, 120.0};
  double notch_q = 30.0;
  double epoch_seconds = 2.0;
  double baseline_seconds = 0.5;

  // ICA
  double ica_threshold = 0.8;
  int ica_max_iterations = 500;
  double ica_tolerance = 1e-6;
  int ica_components = 0;  // 0 = n_channels

  // CSP / embedding
  int patterns_per_class = 8;
  double csp_ridge = 1e-6;
  int n_windows = 16;
  double embed_eps = 1e-12;

  // ERD/ERS
  double erd_band_width_hz = 20.0;
  double erd_bin_seconds = 0.25;
  double erd_low_hz = 30.0;
  double erd_high_hz = 120.0;

  // t-SNE
  TsneOptions tsne;
  int tsne_max_points = 512;  // adapt-eval subsamples beyond this, stratified

  // Synthetic data
  int synth_channels = 64;
  int synth_classes = 13;
  int synth_trials_per_class = 50;
  double synth_boost = 6.0;
  double synth_alpha = 1.0;
  double synth_sigma = 1.0;
  double synth_shift_epsilon = 0.15;
  double synth_shift_noise_sigma = 0.1;

  // Audio
  int audio_target_hz = 22050;

  uint64_t seed = 0;
  int threads = 0;  // 0 = all cores

  // Cross-field validation; throws ValidationError.
  void validate() const;
};

PipelineConfig load_config(const std::string& path);
void save_config(const std::string& path, const PipelineConfig& config);

// Apply JSON content onto an existing config (only the keys present).
void apply_config_json(PipelineConfig& config, const std::string& json_text,
                       const std::string& origin);

}  // namespace nse
