#include "nse/adaptation.hpp"

#include <map>

#include "nse/errors.hpp"

namespace nse {

double adaptation_distance(const std::vector<EmbeddingMatrix>& embeddings) {
  if (embeddings.empty()) throw CoverageError("adaptation_distance: no embeddings");
  const auto dim = embeddings.front().values.size();

  struct Centroid {
    Eigen::VectorXd sum;
    std::size_t count = 0;
  };
  std::map<uint32_t, Centroid> imagined, spoken;

  for (const auto& m : embeddings) {
    if (m.values.size() != dim)
      throw ShapeError("adaptation_distance: embeddings have mixed shapes");
    auto& bucket = (m.domain == Domain::imagined ? imagined : spoken)[m.label];
    if (bucket.count == 0) bucket.sum = Eigen::VectorXd::Zero(dim);
    bucket.sum += flatten(m);
    ++bucket.count;
  }

  if (imagined.empty() || spoken.empty())
    throw CoverageError("adaptation_distance: both domains must be present");

  std::map<uint32_t, bool> all_classes;
  for (const auto& [cls, _] : imagined) all_classes[cls] = true;
  for (const auto& [cls, _] : spoken) all_classes[cls] = true;
  if (all_classes.size() < 2)
    throw CoverageError("adaptation_distance: need at least 2 classes, got " +
                        std::to_string(all_classes.size()));

  double total = 0.0;
  for (const auto& [cls, _] : all_classes) {
    const auto it_im = imagined.find(cls);
    const auto it_sp = spoken.find(cls);
    if (it_im == imagined.end())
      throw CoverageError("adaptation_distance: class " + std::to_string(cls) +
                          " missing from the imagined domain");
    if (it_sp == spoken.end())
      throw CoverageError("adaptation_distance: class " + std::to_string(cls) +
                          " missing from the spoken domain");
    const Eigen::VectorXd centroid_im =
        it_im->second.sum / static_cast<double>(it_im->second.count);
    const Eigen::VectorXd centroid_sp =
        it_sp->second.sum / static_cast<double>(it_sp->second.count);
    total += (centroid_im - centroid_sp).norm();
  }
  return total / static_cast<double>(all_classes.size());
}

}  // namespace nse
