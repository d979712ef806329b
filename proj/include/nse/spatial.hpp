#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "nse/recording.hpp"

namespace nse {

// Per-class averaged spatial covariances, each normalized to unit trace.
struct ClassCovariances {
  std::vector<uint32_t> class_ids;           // ascending
  std::vector<Eigen::MatrixXd> covariances;  // n_channels x n_channels each
  std::vector<std::size_t> trial_counts;

  std::size_t n_classes() const { return class_ids.size(); }
  Eigen::Index n_channels() const { return covariances.empty() ? 0 : covariances.front().rows(); }
  const Eigen::MatrixXd& covariance_for(uint32_t class_id) const;
};

// Fitted CSP filters, one block of patterns_per_class rows per class in
// ascending class-id order. eigenvalue[i] is the generalized eigenvalue of
// filter i for (C_class, C_class + C_rest), so it lives in (0, 1).
struct SpatialFilterBank {
  Eigen::MatrixXd filters;  // n_filters x n_channels
  std::vector<uint32_t> source_class;
  std::vector<double> eigenvalues;
  std::vector<uint32_t> class_ids;
  int patterns_per_class = 0;
  Domain fitted_domain = Domain::imagined;

  Eigen::Index n_filters() const { return filters.rows(); }
  Eigen::Index n_channels() const { return filters.cols(); }
};

// Per epoch C = X X^T / trace(X X^T), averaged per class, ridge-stabilized
// (ridge * trace/n on the diagonal) and renormalized to unit trace.
ClassCovariances class_covariances(const EpochSet& epochs, double ridge = 1e-6);

// Binary CSP: solve C1 w = lambda (C1 + C2) w. Returns n_pairs filters with
// the largest eigenvalues (descending, tagged class_a) followed by n_pairs
// with the smallest (ascending, tagged class_b). Filters are normalized so
// w^T (C1 + C2) w = 1 and sign-fixed so the largest-|entry| is positive.
SpatialFilterBank csp_binary(const Eigen::MatrixXd& c1, const Eigen::MatrixXd& c2, int n_pairs,
                             uint32_t class_a = 0, uint32_t class_b = 1);

// One-vs-rest multi-class CSP: per class, binary CSP of that class against
// the unweighted mean of the others, patterns_per_class/2 pairs each.
SpatialFilterBank csp_multiclass(const ClassCovariances& covs, int patterns_per_class);

// Apply the bank: each output epoch is filters * epoch. The same bank fitted
// on imagined epochs is meant to be applied unchanged to spoken epochs.
Eigen::MatrixXd project_epoch(const SpatialFilterBank& bank, const Eigen::MatrixXd& epoch);
EpochSet project(const SpatialFilterBank& bank, const EpochSet& epochs);

void write_filter_bank(const std::string& path, const SpatialFilterBank& bank);
SpatialFilterBank read_filter_bank(const std::string& path);

}  // namespace nse
