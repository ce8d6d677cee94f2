#include "gaitvib/pig/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gaitvib/core/error.hpp"

namespace gaitvib::pig {

using gaitsynth::GaitEvent;
using gaitsynth::Joint;

std::string_view to_string(NodeKind k) noexcept {
  switch (k) {
    case NodeKind::Hip: return "hip";
    case NodeKind::Knee: return "knee";
    case NodeKind::Ankle: return "ankle";
    case NodeKind::Time: return "time";
    case NodeKind::Vibration: return "vibration";
    case NodeKind::Body: return "body";
    case NodeKind::LatentForce: return "latent_force";
  }
  return "?";
}

std::string_view to_string(EdgeKind k) noexcept {
  switch (k) {
    case EdgeKind::Spatial: return "spatial";
    case EdgeKind::Temporal: return "temporal";
    case EdgeKind::Indirect: return "indirect";
    case EdgeKind::TimeConstraint: return "time_constraint";
    case EdgeKind::BodyDimension: return "body_dimension";
    case EdgeKind::ForceConstraint: return "force_constraint";
  }
  return "?";
}

std::size_t GraphInstance::count(NodeKind k) const noexcept {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [k](const Node& n) { return n.kind == k; }));
}

std::size_t GraphInstance::count(EdgeKind k) const noexcept {
  return static_cast<std::size_t>(
      std::count_if(edges.begin(), edges.end(), [k](const Edge& e) { return e.kind == k; }));
}

namespace {

bool allowed(EdgeKind kind, NodeKind src, NodeKind dst) {
  switch (kind) {
    case EdgeKind::Spatial:
      return (src == NodeKind::Hip && dst == NodeKind::Knee) ||
             (src == NodeKind::Knee && dst == NodeKind::Ankle);
    case EdgeKind::Temporal: return is_joint(src) && src == dst;
    case EdgeKind::Indirect: return src == NodeKind::Vibration && is_joint(dst);
    case EdgeKind::TimeConstraint: return src == NodeKind::Time && is_joint(dst);
    case EdgeKind::BodyDimension: return src == NodeKind::Body && is_joint(dst);
    case EdgeKind::ForceConstraint:
      return (src == NodeKind::Body || src == NodeKind::Vibration) && dst == NodeKind::LatentForce;
  }
  return false;
}

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t i) {
  while (parent[i] != i) i = parent[i] = parent[parent[i]];
  return i;
}

NodeKind joint_kind(Joint j) {
  switch (j) {
    case Joint::Hip: return NodeKind::Hip;
    case Joint::Knee: return NodeKind::Knee;
    case Joint::Ankle: return NodeKind::Ankle;
  }
  return NodeKind::Hip;
}

}  // namespace

void GraphInstance::validate() const {
  std::size_t vib_len = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Node& n = nodes[i];
    std::size_t expect = 0;
    if (is_joint(n.kind)) expect = kJointFeatures;
    else if (n.kind == NodeKind::Time) expect = kTimeFeatures;
    else if (n.kind == NodeKind::Body) expect = kBodyFeatures;
    else if (n.kind == NodeKind::Vibration) expect = vib_len = vib_len ? vib_len : n.features.size();
    if (n.features.size() != expect)
      throw DataError("graph node " + std::to_string(i) + " (" + std::string(to_string(n.kind)) +
                      "): " + std::to_string(n.features.size()) + " features, expected " +
                      std::to_string(expect));
  }
  if (vib_valid > vib_len) throw DataError("graph: vibration validity exceeds the window");

  std::vector<std::size_t> parent(nodes.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const Edge& e = edges[i];
    if (e.src >= nodes.size() || e.dst >= nodes.size() || e.src == e.dst)
      throw DataError("graph edge " + std::to_string(i) + ": bad endpoints");
    if (!allowed(e.kind, nodes[e.src].kind, nodes[e.dst].kind))
      throw DataError("graph edge " + std::to_string(i) + ": " + std::string(to_string(e.kind)) +
                      " cannot join " + std::string(to_string(nodes[e.src].kind)) + " and " +
                      std::string(to_string(nodes[e.dst].kind)));
    parent[find_root(parent, e.src)] = find_root(parent, e.dst);
  }
  for (std::size_t i = 1; i < nodes.size(); ++i)
    if (find_root(parent, i) != find_root(parent, 0)) throw DataError("graph is not connected");
}

GraphInstance build_graph(const gaitsynth::TrialRecord& trial, const gaitsynth::GaitCycle& cycle,
                          std::size_t vib_window) {
  if (cycle.trial_id != trial.trial_id)
    throw DataError("cycle of trial " + std::to_string(cycle.trial_id) + " used with trial " +
                    std::to_string(trial.trial_id));
  const auto& vib = trial.vibration;
  const double fs = vib.sample_rate;
  const double first = std::round((cycle.start - vib.start_time) * fs);
  const double count = std::floor(cycle.duration() * fs + 1e-6) + 1.0;
  if (!(cycle.duration() > 0.0) || first < 0.0 ||
      first + count > static_cast<double>(vib.samples()))
    throw DataError("cycle [" + std::to_string(cycle.start) + ", " + std::to_string(cycle.end) +
                    "] s lies outside the vibration record of trial " + std::to_string(trial.trial_id));
  const auto n_valid = static_cast<std::size_t>(count);
  if (n_valid > vib_window)
    throw DataError("cycle needs " + std::to_string(n_valid) + " vibration samples, window holds " +
                    std::to_string(vib_window));

  GraphInstance g;
  g.cycle = cycle;
  g.targets = gaitsynth::extract_targets(trial.trajectory(cycle.foot), cycle);
  g.gait_type = trial.gait_type;
  g.subject_id = trial.subject_id;
  g.vib_valid = n_valid;

  auto add = [&](NodeKind k, std::uint32_t slot, std::vector<double> f) {
    g.nodes.push_back({k, slot, std::move(f)});
    return static_cast<std::uint32_t>(g.nodes.size() - 1);
  };
  std::array<std::uint32_t, gaitsynth::kTargetCount> joint{};
  for (Joint j : gaitsynth::kJoints)
    for (GaitEvent e : gaitsynth::kGaitEvents) {
      std::vector<double> f(kJointFeatures, 0.0);
      f[static_cast<std::size_t>(j)] = 1.0;
      f[3 + static_cast<std::size_t>(e)] = 1.0;
      const auto slot = static_cast<std::uint32_t>(gaitsynth::target_index(j, e));
      joint[slot] = add(joint_kind(j), slot, std::move(f));
    }
  const double dur = cycle.duration();
  const std::uint32_t t_strike = add(NodeKind::Time, 0, {0.0, dur / 1.5, 1.0});
  const std::uint32_t t_off = add(NodeKind::Time, 1, {(cycle.foot_off - cycle.start) / dur, dur / 1.5, -1.0});
  std::vector<std::uint32_t> sensors;
  const auto i0 = static_cast<std::size_t>(first);
  for (std::size_t s = 0; s < vib.sensors(); ++s) {
    std::vector<double> w(vib_window, 0.0);
    std::copy_n(vib.signals[s].begin() + static_cast<std::ptrdiff_t>(i0), n_valid, w.begin());
    sensors.push_back(add(NodeKind::Vibration, static_cast<std::uint32_t>(s), std::move(w)));
  }
  const auto& a = trial.anthropometry;
  const std::uint32_t body = add(NodeKind::Body, 0,
                                 {a.body_mass / 100.0, a.thigh_length / 0.5, a.shank_length / 0.5,
                                  a.foot_length / 0.3});
  const std::uint32_t force = add(NodeKind::LatentForce, 0, {});

  auto link = [&](std::uint32_t s, std::uint32_t d, EdgeKind k) { g.edges.push_back({s, d, k}); };
  for (GaitEvent e : gaitsynth::kGaitEvents) {
    link(joint[target_index(Joint::Hip, e)], joint[target_index(Joint::Knee, e)], EdgeKind::Spatial);
    link(joint[target_index(Joint::Knee, e)], joint[target_index(Joint::Ankle, e)], EdgeKind::Spatial);
  }
  for (Joint j : gaitsynth::kJoints)
    for (std::size_t e = 0; e + 1 < gaitsynth::kGaitEvents.size(); ++e)
      link(joint[target_index(j, gaitsynth::kGaitEvents[e])],
           joint[target_index(j, gaitsynth::kGaitEvents[e + 1])], EdgeKind::Temporal);
  for (std::uint32_t s : sensors)
    for (std::uint32_t j : joint) link(s, j, EdgeKind::Indirect);
  for (std::uint32_t t : {t_strike, t_off})
    for (std::uint32_t j : joint) link(t, j, EdgeKind::TimeConstraint);
  for (std::uint32_t j : joint) link(body, j, EdgeKind::BodyDimension);
  link(body, force, EdgeKind::ForceConstraint);
  for (std::uint32_t s : sensors) link(s, force, EdgeKind::ForceConstraint);

  g.validate();
  return g;
}

std::vector<GraphInstance> build_graphs(const gaitsynth::TrialRecord& trial, std::size_t vib_window) {
  std::vector<GraphInstance> out;
  for (const auto& c : trial.cycles()) out.push_back(build_graph(trial, c, vib_window));
  return out;
}

GraphInstance relabel(const GraphInstance& g, std::span<const std::uint32_t> perm) {
  if (perm.size() != g.nodes.size()) throw std::invalid_argument("relabel: permutation size mismatch");
  std::vector<bool> seen(perm.size(), false);
  for (auto p : perm) {
    if (p >= perm.size() || seen[p]) throw std::invalid_argument("relabel: not a permutation");
    seen[p] = true;
  }
  GraphInstance out = g;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) out.nodes[perm[i]] = g.nodes[i];
  for (auto& e : out.edges) {
    e.src = perm[e.src];
    e.dst = perm[e.dst];
  }
  return out;
}

GraphInstance without_edges(const GraphInstance& g, EdgeKind kind) {
  GraphInstance out = g;
  std::erase_if(out.edges, [kind](const Edge& e) { return e.kind == kind; });
  return out;
}

}  // namespace gaitvib::pig
