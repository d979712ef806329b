#pragma once

#include <vector>

#include "nse/embedding.hpp"

namespace nse {

// Mean over classes of the Euclidean distance between the imagined-domain and
// spoken-domain centroids of flattened embedding vectors. Every class present
// must appear in both domains.
double adaptation_distance(const std::vector<EmbeddingMatrix>& embeddings);

}  // namespace nse
