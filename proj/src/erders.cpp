#include "nse/erders.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "nse/errors.hpp"
#include "nse/parallel.hpp"
#include "nse/welch.hpp"

namespace nse {

ErdErsGrid erd_ers(const EpochSet& epochs, double band_width_hz, double bin_seconds,
                   std::pair<double, double> range_hz, const ReferencePower& reference,
                   int scope_channel) {
  epochs.validate();
  if (epochs.n_epochs() == 0) throw InsufficientDataError("erd_ers: empty epoch set");
  const double nyq = epochs.fs_hz / 2.0;
  if (!(range_hz.first > 0.0 && range_hz.first < range_hz.second && range_hz.second < nyq))
    throw InvalidParameterError("erd_ers: range must satisfy 0 < low < high < fs/2");
  if (band_width_hz <= 0.0) throw InvalidParameterError("erd_ers: band_width_hz must be positive");
  if (scope_channel >= epochs.n_channels())
    throw OutOfRangeError("erd_ers: scope channel " + std::to_string(scope_channel) +
                          " out of range");

  const auto bin_len = static_cast<Eigen::Index>(std::llround(bin_seconds * epochs.fs_hz));
  if (bin_len < 4) throw InvalidParameterError("erd_ers: bin shorter than 4 samples");
  const auto n_bins = epochs.n_samples_per_epoch() / bin_len;
  if (n_bins < 1) throw InvalidParameterError("erd_ers: bin_seconds exceeds the epoch length");

  ErdErsGrid grid;
  grid.scope_channel = scope_channel;
  for (double lo = range_hz.first; lo < range_hz.second; lo += band_width_hz)
    grid.bands_hz.emplace_back(lo, std::min(lo + band_width_hz, range_hz.second));
  for (Eigen::Index t = 0; t < n_bins; ++t)
    grid.time_bins_s.emplace_back(static_cast<double>(t * bin_len) / epochs.fs_hz,
                                  static_cast<double>((t + 1) * bin_len) / epochs.fs_hz);

  const auto n_bands = static_cast<Eigen::Index>(grid.bands_hz.size());
  const std::size_t nperseg = std::min<std::size_t>(static_cast<std::size_t>(bin_len), 128);

  std::vector<Eigen::Index> channels;
  if (scope_channel >= 0)
    channels.push_back(scope_channel);
  else
    for (Eigen::Index c = 0; c < epochs.n_channels(); ++c) channels.push_back(c);

  // Per-epoch partial grids, reduced in fixed epoch order.
  std::vector<Eigen::MatrixXd> partial(epochs.n_epochs());
  parallel_for(epochs.n_epochs(), [&](std::size_t k) {
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n_bands, n_bins);
    std::vector<double> x(static_cast<std::size_t>(bin_len));
    for (Eigen::Index c : channels) {
      for (Eigen::Index t = 0; t < n_bins; ++t) {
        for (Eigen::Index i = 0; i < bin_len; ++i)
          x[static_cast<std::size_t>(i)] = epochs.epochs[k](c, t * bin_len + i);
        const Psd psd = welch_psd(x, epochs.fs_hz, nperseg);
        for (Eigen::Index b = 0; b < n_bands; ++b)
          acc(b, t) += band_power(psd, grid.bands_hz[static_cast<std::size_t>(b)].first,
                                  grid.bands_hz[static_cast<std::size_t>(b)].second);
      }
    }
    partial[k] = acc / static_cast<double>(channels.size());
  });

  Eigen::MatrixXd mean_power = Eigen::MatrixXd::Zero(n_bands, n_bins);
  for (const auto& p : partial) mean_power += p;
  mean_power /= static_cast<double>(epochs.n_epochs());

  // Reference power per band.
  Eigen::VectorXd ref_power(n_bands);
  if (reference.mode == ReferencePower::Mode::first_bin) {
    ref_power = mean_power.col(0);
  } else {
    reference.external.validate();
    if (reference.external.n_epochs() == 0)
      throw InsufficientDataError("erd_ers: empty external reference");
    if (reference.external.fs_hz != epochs.fs_hz ||
        reference.external.n_channels() != epochs.n_channels())
      throw AlignmentError("erd_ers: external reference must match fs and channel count");
    ref_power.setZero();
    const auto ext_len = reference.external.n_samples_per_epoch();
    std::vector<double> x(static_cast<std::size_t>(ext_len));
    for (std::size_t k = 0; k < reference.external.n_epochs(); ++k) {
      for (Eigen::Index c : channels) {
        for (Eigen::Index t = 0; t < ext_len; ++t)
          x[static_cast<std::size_t>(t)] = reference.external.epochs[k](c, t);
        const Psd psd = welch_psd(x, epochs.fs_hz, nperseg);
        for (Eigen::Index b = 0; b < n_bands; ++b)
          ref_power(b) += band_power(psd, grid.bands_hz[static_cast<std::size_t>(b)].first,
                                     grid.bands_hz[static_cast<std::size_t>(b)].second);
      }
    }
    ref_power /= static_cast<double>(reference.external.n_epochs() * channels.size());
  }

  for (Eigen::Index b = 0; b < n_bands; ++b) {
    if (!(ref_power(b) > 0.0))
      throw DegenerateInputError("erd_ers: reference power is zero in band " +
                                 std::to_string(grid.bands_hz[static_cast<std::size_t>(b)].first) +
                                 "-" +
                                 std::to_string(grid.bands_hz[static_cast<std::size_t>(b)].second) +
                                 " Hz");
  }

  grid.values = 100.0 * ((mean_power.array().colwise() - ref_power.array()).colwise() /
                         ref_power.array());
  return grid;
}

void write_grid_csv(const std::string& path, const ErdErsGrid& grid) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  char buf[64];
  out << "band_hz";
  for (const auto& bin : grid.time_bins_s) {
    std::snprintf(buf, sizeof(buf), ",%.3f-%.3f", bin.first, bin.second);
    out << buf;
  }
  out << '\n';
  for (Eigen::Index b = 0; b < grid.values.rows(); ++b) {
    std::snprintf(buf, sizeof(buf), "%g-%g", grid.bands_hz[static_cast<std::size_t>(b)].first,
                  grid.bands_hz[static_cast<std::size_t>(b)].second);
    out << buf;
    for (Eigen::Index t = 0; t < grid.values.cols(); ++t) {
      std::snprintf(buf, sizeof(buf), ",%.17g", grid.values(b, t));
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw IoError("short write to '" + path + "'");
}

}  // namespace nse
