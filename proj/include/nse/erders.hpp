#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "nse/recording.hpp"

namespace nse {

// Relative band-power change (percent) per frequency band and time bin,
// against a reference power per band.
struct ErdErsGrid {
  std::vector<std::pair<double, double>> bands_hz;
  std::vector<std::pair<double, double>> time_bins_s;
  Eigen::MatrixXd values;  // n_bands x n_bins, percent
  int scope_channel = -1;  // -1 = average over channels
};

// Reference power: mean power of the first time bin across epochs (default),
// or band power of external pre-trial epochs.
struct ReferencePower {
  enum class Mode { first_bin, external };
  Mode mode = Mode::first_bin;
  EpochSet external;
};

// Tile [range.first, range.second) into band_width_hz bands (last one
// truncated), cut epochs into bin_seconds bins, and compute
// 100 * (P(band, bin) - R(band)) / R(band) from Welch band powers
// (Hann window of min(bin length, 128) samples, 50% overlap), averaged
// over epochs and scope channels.
ErdErsGrid erd_ers(const EpochSet& epochs, double band_width_hz, double bin_seconds,
                   std::pair<double, double> range_hz, const ReferencePower& reference = {},
                   int scope_channel = -1);

// CSV: header row of bin intervals, one row per band.
void write_grid_csv(const std::string& path, const ErdErsGrid& grid);

}  // namespace nse
