#pragma once

#include <array>
#include <cstddef>
#include <span>

#include "gaitvib/gaitsynth/cycles.hpp"
#include "gaitvib/pig/graph.hpp"

namespace gaitvib::pig {

/// Training-set statistics shared by both models: per-slot target mean and
/// spread (readouts predict in standard units) and one scale for all
/// vibration samples. The default is the identity.
struct Normalizer {
  std::array<double, gaitsynth::kTargetCount> target_mean{};
  std::array<double, gaitsynth::kTargetCount> target_std{1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1};
  double vib_scale = 1.0;  // V

  bool operator==(const Normalizer&) const = default;
};

inline constexpr double kMinTargetStd = 1.0;  // deg

/// Fits on graphs[indices]: target means, standard deviations floored at
/// 1 deg, and the RMS of the valid vibration samples. Throws DataError on an
/// empty selection.
Normalizer fit_normalizer(std::span<const GraphInstance> graphs, std::span<const std::size_t> indices);

}  // namespace gaitvib::pig
