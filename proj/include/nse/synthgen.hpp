#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "nse/recording.hpp"

namespace nse {

// Class-conditioned synthetic EEG with planted ground truth. Imagined epochs
// are pink-noise background plus a variance boost along a per-class direction;
// spoken epochs are independently drawn imagined-style epochs pushed through a
// perturbed channel mixing (I + eps * R) with additive sensor noise.
struct SynthSpec {
  int n_channels = 64;
  int n_classes = 13;
  int trials_per_class = 50;
  double epoch_seconds = 2.0;
  double fs_hz = 1000.0;

  // Per-class unit directions, n_classes x n_channels. Empty -> drawn from
  // the seed with pairwise |cos| < 0.5.
  Eigen::MatrixXd planted_directions;

  // Per-class variance gain along the planted direction. Empty -> all 6.
  std::vector<double> boosts;

  double noise_alpha = 1.0;      // pink exponent (power ~ 1/f^alpha)
  double noise_sigma = 1.0;      // background std, microvolts
  double shift_epsilon = 0.15;   // spectral norm of the mixing perturbation
  double shift_noise_sigma = 0.1;  // spoken-domain additive sensor noise std

  uint64_t seed = 0;

  void validate() const;
};

struct SynthTruth {
  Eigen::MatrixXd directions;           // n_classes x n_channels
  std::vector<double> boosts;           // per class
  Eigen::MatrixXd mixing_perturbation;  // n_channels x n_channels, I + eps*R
  uint64_t seed = 0;
};

struct SynthData {
  EpochSet imagined;
  EpochSet spoken;
  SynthTruth truth;
};

SynthData generate(const SynthSpec& spec);

// Ground-truth JSON for the planted directions and domain shift.
void write_synth_truth(const std::string& path, const SynthTruth& truth);
SynthTruth read_synth_truth(const std::string& path);

// Lay epochs end-to-end into a continuous recording, preceding each trial
// with gap_seconds of background noise so baseline windows exist. The epochs
// are placed verbatim; events mark their onsets.
std::pair<Recording, EventList> epochs_to_recording(const EpochSet& set, double gap_seconds,
                                                    double noise_alpha, double noise_sigma,
                                                    uint64_t seed);

// Independent sources (deterministic waveforms plus one blink-like burst
// source, which is copied into the EOG reference channel) mixed by a seeded
// full-rank matrix. The substrate for ICA artifact-rejection tests.
struct ArtifactMixture {
  Recording mixed;
  Recording references;     // single "EOG" channel, equal to the blink source
  Eigen::MatrixXd sources;  // n_sources x n_samples
  Eigen::MatrixXd mixing;   // n_channels x n_sources
  int blink_source_index = -1;
};

ArtifactMixture generate_artifact_mixture(uint64_t seed, int n_channels, int n_sources,
                                          double duration_seconds = 20.0, double fs_hz = 1000.0);

// Mean-zero unit-variance pink noise of length n (spectral shaping at the
// next power of two, cropped). Exposed for tests and the artifact generator.
std::vector<double> pink_noise(std::size_t n, double alpha, uint64_t key);

}  // namespace nse
