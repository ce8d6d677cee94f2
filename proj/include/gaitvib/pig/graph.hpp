#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "gaitvib/gaitsynth/cycles.hpp"
#include "gaitvib/gaitsynth/trial.hpp"

namespace gaitvib::pig {

enum class NodeKind : std::uint8_t { Hip, Knee, Ankle, Time, Vibration, Body, LatentForce };
enum class EdgeKind : std::uint8_t { Spatial, Temporal, Indirect, TimeConstraint, BodyDimension, ForceConstraint };

inline constexpr std::array<EdgeKind, 6> kEdgeKinds{EdgeKind::Spatial,        EdgeKind::Temporal,
                                                    EdgeKind::Indirect,       EdgeKind::TimeConstraint,
                                                    EdgeKind::BodyDimension,  EdgeKind::ForceConstraint};

std::string_view to_string(NodeKind k) noexcept;
std::string_view to_string(EdgeKind k) noexcept;
inline constexpr bool is_joint(NodeKind k) noexcept {
  return k == NodeKind::Hip || k == NodeKind::Knee || k == NodeKind::Ankle;
}

inline constexpr std::size_t kDefaultVibWindow = 1024;
inline constexpr std::size_t kJointFeatures = 7;  // one-hot joint (3) + one-hot event (4)
inline constexpr std::size_t kTimeFeatures = 3;   // normalized time, duration / 1.5 s, +1 strike / -1 off
inline constexpr std::size_t kBodyFeatures = 4;   // mass / 100 kg, thigh / 0.5 m, shank / 0.5 m, foot / 0.3 m

/// `slot` identifies the node within its kind independently of its index:
/// target_index for joints, 0 strike / 1 off for time nodes, the sensor index
/// for vibration nodes, 0 otherwise.
struct Node {
  NodeKind kind = NodeKind::LatentForce;
  std::uint32_t slot = 0;
  std::vector<double> features;
};

/// Edges are stored once with a fixed orientation: proximal to distal
/// (Spatial), earlier to later event (Temporal), vibration to joint
/// (Indirect), time to joint, body to joint, and body or vibration to the
/// latent force node. Message passing uses both directions.
struct Edge {
  std::uint32_t src = 0;
  std::uint32_t dst = 0;
  EdgeKind kind = EdgeKind::Spatial;
};

struct GraphInstance {
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  gaitsynth::GaitCycle cycle;
  gaitsynth::TargetAngles targets;
  gaitsynth::GaitType gait_type = gaitsynth::GaitType::Normal;
  std::uint64_t subject_id = 0;
  std::size_t vib_valid = 0;  // samples of real signal at the head of each vibration window

  std::size_t count(NodeKind k) const noexcept;
  std::size_t count(EdgeKind k) const noexcept;
  /// Throws DataError when an edge joins a disallowed kind pair, an index is
  /// out of range, feature sizes are wrong or the graph is disconnected.
  void validate() const;
};

/// Vibration windows start at the cycle's foot strike, hold one cycle of the
/// 500 Hz record and are zero-padded to `vib_window` samples. Throws DataError
/// when the cycle does not belong to the trial, lies outside the record or is
/// longer than the window.
GraphInstance build_graph(const gaitsynth::TrialRecord& trial, const gaitsynth::GaitCycle& cycle,
                          std::size_t vib_window = kDefaultVibWindow);

/// One graph per cycle of the trial, in extract_cycles order.
std::vector<GraphInstance> build_graphs(const gaitsynth::TrialRecord& trial,
                                        std::size_t vib_window = kDefaultVibWindow);

/// Same graph with node i moved to index perm[i].
GraphInstance relabel(const GraphInstance& g, std::span<const std::uint32_t> perm);

/// Copy without the edges of one kind.
GraphInstance without_edges(const GraphInstance& g, EdgeKind kind);

}  // namespace gaitvib::pig
