#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "nse/recording.hpp"

namespace nse {

// FastICA decomposition. Source activations of centered data x are
// s = unmixing * whitening * x; reconstruction is mixing_pseudo_inverse * s
// plus the channel means. Components are ordered by descending explained
// variance. unmixing has orthonormal rows in whitened space.
struct IcaModel {
  Eigen::MatrixXd whitening;              // k x n_channels
  Eigen::MatrixXd unmixing;               // k x k
  Eigen::MatrixXd mixing_pseudo_inverse;  // n_channels x k
  Eigen::VectorXd channel_means;          // n_channels
  int k = 0;

  Eigen::Index n_channels() const { return whitening.cols(); }

  // Component activations for channel-major data.
  Eigen::MatrixXd activations(const Eigen::MatrixXd& samples) const;
};

struct IcaOptions {
  int max_iterations = 500;
  double tolerance = 1e-6;
};

// Symmetric FastICA with tanh contrast; deterministic given the seed.
// k components are requested; near-zero covariance eigenvalues are dropped
// (with a warning), which can reduce the effective k.
IcaModel fit_ica(const Eigen::MatrixXd& samples, int k, uint64_t seed, IcaOptions opts = {});
IcaModel fit_ica(const Recording& rec, int k, uint64_t seed, IcaOptions opts = {});
IcaModel fit_ica(const EpochSet& epochs, int k, uint64_t seed, IcaOptions opts = {});

// Zero every component whose max |Pearson r| against any reference channel
// exceeds the threshold, then reconstruct. References must be time-aligned
// with the data. Indices of removed components are reported via `rejected`.
Recording reject_components(const IcaModel& model, const Recording& data,
                            const Recording& references, double threshold,
                            std::vector<int>* rejected = nullptr);

void write_ica_model(const std::string& path, const IcaModel& model);
IcaModel read_ica_model(const std::string& path);

}  // namespace nse
