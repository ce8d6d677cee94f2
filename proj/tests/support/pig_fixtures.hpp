#pragma once

// Small synthetic datasets for model tests.

#include <cstdint>
#include <random>
#include <vector>

#include "gaitvib/core/rng.hpp"
#include "gaitvib/gaitsynth/trial.hpp"
#include "gaitvib/pig/graph.hpp"

namespace gaitvib::testing {

/// Graphs of `trials_per_type` trials of every gait type for each subject.
inline std::vector<pig::GraphInstance> synthetic_graphs(int subjects, int trials_per_type,
                                                        std::uint64_t seed = 99) {
  floorsim::FloorModel floor;
  std::vector<pig::GraphInstance> out;
  std::uint64_t id = 0;
  for (int s = 0; s < subjects; ++s) {
    const auto subject = gaitsynth::make_subject(static_cast<std::uint64_t>(s), seed);
    for (auto type : gaitsynth::kGaitTypes)
      for (int k = 0; k < trials_per_type; ++k, ++id) {
        const auto trial = gaitsynth::synth_trial(type, subject, id, derive_seed(seed, {id}), floor);
        for (auto& g : pig::build_graphs(trial)) out.push_back(std::move(g));
      }
  }
  return out;
}

/// Shrinks a real graph to `window` vibration samples and redraws every
/// feature and target from N(0, 1), keeping the topology.
inline pig::GraphInstance small_graph(const pig::GraphInstance& real, std::size_t window, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  pig::GraphInstance g = real;
  g.vib_valid = window / 2 + static_cast<std::size_t>(uniform01(rng) * static_cast<double>(window / 2 + 1));
  for (auto& n : g.nodes) {
    if (n.kind == pig::NodeKind::Vibration) {
      n.features.assign(window, 0.0);
      for (std::size_t i = 0; i < g.vib_valid; ++i) n.features[i] = nd(rng);
    } else if (n.kind == pig::NodeKind::Time || n.kind == pig::NodeKind::Body) {
      for (auto& f : n.features) f = nd(rng);
    }
  }
  for (auto& t : g.targets.values) t = nd(rng);
  return g;
}

}  // namespace gaitvib::testing
