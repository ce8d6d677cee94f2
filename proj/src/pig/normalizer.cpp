#include "gaitvib/pig/normalizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gaitvib/core/error.hpp"

namespace gaitvib::pig {

Normalizer fit_normalizer(std::span<const GraphInstance> graphs, std::span<const std::size_t> indices) {
  if (indices.empty()) throw DataError("cannot fit a normalizer on an empty split");
  Normalizer n;
  const double count = static_cast<double>(indices.size());
  for (std::size_t k = 0; k < gaitsynth::kTargetCount; ++k) {
    double mean = 0.0;
    for (std::size_t i : indices) mean += graphs[i].targets[k];
    mean /= count;
    double var = 0.0;
    for (std::size_t i : indices) var += (graphs[i].targets[k] - mean) * (graphs[i].targets[k] - mean);
    n.target_mean[k] = mean;
    n.target_std[k] = std::max(kMinTargetStd, std::sqrt(var / count));
  }
  double sq = 0.0, samples = 0.0;
  for (std::size_t i : indices) {
    const auto& g = graphs[i];
    for (const auto& node : g.nodes) {
      if (node.kind != NodeKind::Vibration) continue;
      for (std::size_t t = 0; t < g.vib_valid; ++t) sq += node.features[t] * node.features[t];
      samples += static_cast<double>(g.vib_valid);
    }
  }
  if (samples > 0.0 && sq > 0.0) n.vib_scale = std::sqrt(sq / samples);
  return n;
}

}  // namespace gaitvib::pig
