#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "nse/embedding.hpp"

namespace nse {

struct TsneOptions {
  double perplexity = 30.0;
  int iterations = 1000;
  double learning_rate = 200.0;
  double early_exaggeration = 12.0;
  int exaggeration_iterations = 250;
  double momentum_initial = 0.5;
  double momentum_final = 0.8;
  int momentum_switch_iteration = 250;
  uint64_t seed = 0;
};

struct TsneResult {
  Eigen::MatrixXd points;  // n x 2
  double kl_initial = 0.0;
  double kl_final = 0.0;
  TsneOptions options;
};

// Exact O(n^2) t-SNE: per-point Gaussian bandwidths matched to the perplexity
// by binary search (50 iterations, 1e-5 tolerance on log-perplexity),
// symmetrized affinities, Student-t low-dimensional kernel, gradient descent
// with momentum and early exaggeration. Deterministic given the seed; initial
// points are drawn from a seeded isotropic Gaussian with sigma 1e-4.
TsneResult tsne(const Eigen::MatrixXd& features, const TsneOptions& opts);
TsneResult tsne(const Eigen::MatrixXd& features, double perplexity, int iterations, uint64_t seed);

// The symmetrized affinity matrix used by tsne (entries sum to 1). Exposed
// for diagnostics.
Eigen::MatrixXd tsne_affinities(const Eigen::MatrixXd& features, double perplexity);

// CSV `epoch_id,label,domain,x,y`, one row per embedded point.
void write_tsne_csv(const std::string& path, const TsneResult& result,
                    const std::vector<EmbeddingMatrix>& source);

}  // namespace nse
