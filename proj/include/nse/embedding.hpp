#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "nse/recording.hpp"

namespace nse {

// Per-epoch time-windowed log-variance features: entry [t, j] is the natural
// log of the population variance of filter-channel j over time window t.
struct EmbeddingMatrix {
  Eigen::MatrixXd values;  // n_windows x n_filters
  uint32_t epoch_id = 0;
  uint32_t label = 0;
  Domain domain = Domain::imagined;

  Eigen::Index n_windows() const { return values.rows(); }
  Eigen::Index n_filters() const { return values.cols(); }
};

// Display-only variant: entries strictly below their column mean are flagged.
// A separate type so masked output cannot be fed back into t-SNE or the
// adaptation metric.
struct MaskedEmbedding {
  Eigen::MatrixXd values;  // original values
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> masked;
  uint32_t epoch_id = 0;
  uint32_t label = 0;
  Domain domain = Domain::imagined;
};

// Split each epoch into n_windows equal contiguous windows (a trailing
// remainder of at most n_windows-1 samples is dropped) and take log-variance
// per window and filter channel, floored at eps.
std::vector<EmbeddingMatrix> embed(const EpochSet& projected, int n_windows, double eps = 1e-12);
EmbeddingMatrix embed_epoch(const Eigen::MatrixXd& epoch, int n_windows, double eps,
                            uint32_t epoch_id, uint32_t label, Domain domain);

// Flag entries strictly below their column mean. Re-masking a masked matrix
// recomputes each column mean over the kept entries only; already-masked
// entries stay masked.
MaskedEmbedding column_mean_mask(const EmbeddingMatrix& m);
MaskedEmbedding column_mean_mask(const MaskedEmbedding& m);

// File/CSV representation of a masked matrix: kept values are shifted by
// -column_min so they are >= 0, masked entries become the sentinel 0.
Eigen::MatrixXd masked_export_values(const MaskedEmbedding& m);

// Embedding container: JSON header line {version, n_windows, n_filters,
// count}, then per record a 16-byte header (epoch_id u32, label u32,
// domain u8, 7 pad bytes) and row-major little-endian f32 values.
void save_embeddings(const std::string& path, const std::vector<EmbeddingMatrix>& ms);
std::vector<EmbeddingMatrix> load_embeddings(const std::string& path);

// One CSV row per (epoch, window), for external plotting.
void export_embeddings_csv(const std::string& path, const std::vector<EmbeddingMatrix>& ms);
void export_masked_csv(const std::string& path, const std::vector<MaskedEmbedding>& ms);

// Row-major flattening (window-major) used by t-SNE and adaptation metrics.
Eigen::VectorXd flatten(const EmbeddingMatrix& m);
Eigen::MatrixXd stack_flattened(const std::vector<EmbeddingMatrix>& ms);

}  // namespace nse
