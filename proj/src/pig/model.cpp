#include "gaitvib/pig/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "gaitvib/core/error.hpp"
#include "gaitvib/pig/recurrent.hpp"

namespace gaitvib::pig {

using num::Init;
using num::Tape;
using num::Var;

void PigConfig::validate() const {
  auto positive = [](std::size_t v, const char* name) {
    if (v == 0) throw ConfigError(std::string("pig.") + name + " must be positive");
  };
  positive(hidden_dim, "hidden_dim");
  positive(attention_heads, "attention_heads");
  positive(lstm_hidden, "lstm_hidden");
  positive(message_rounds, "message_rounds");
  positive(vib_window, "vib_window");
  positive(frame_length, "frame_length");
  positive(epochs, "epochs");
  positive(batch_size, "batch_size");
  positive(patience, "patience");
  if (lstm_hidden < 2) throw ConfigError("pig.lstm_hidden must be at least 2");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw ConfigError("pig.learning_rate must be finite and non-negative");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("pig.lambda must be finite and non-negative");
}

namespace {

constexpr std::array<const char*, 4> kGroups{"joint", "time", "vibration", "body"};

std::string msg_name(EdgeKind k, bool forward) {
  return "pig.msg." + std::string(to_string(k)) + (forward ? ".fwd" : ".rev");
}

bool has_message(EdgeKind k, bool forward) { return !(k == EdgeKind::ForceConstraint && forward); }

int group_of(NodeKind k) {
  if (is_joint(k)) return 0;
  if (k == NodeKind::Time) return 1;
  if (k == NodeKind::Vibration) return 2;
  if (k == NodeKind::Body) return 3;
  return -1;
}

std::size_t sin_rows(std::size_t l) { return (l + 1) / 2; }

struct Head {
  Var Wq, Wz, a;
};

struct BioVars {
  Var sinW, cosW, bodyW, bodyb;
  std::vector<Head> heads;
};

BioVars bio_vars(Tape& t, const PigConfig& cfg) {
  BioVars v{t.param("pig.bio.sin.W"), t.param("pig.bio.cos.W"), t.param("pig.bio.body.W"),
            t.param("pig.bio.body.b"), {}};
  for (std::size_t k = 0; k < cfg.attention_heads; ++k) {
    const std::string p = "pig.att." + std::to_string(k);
    v.heads.push_back({t.param(p + ".Wq"), t.param(p + ".Wz"), t.param(p + ".a")});
  }
  return v;
}

struct Graph {
  std::array<std::uint32_t, gaitsynth::kTargetCount> joint{};
  std::uint32_t body = 0;
  std::uint32_t force = 0;
  std::vector<std::uint32_t> sensors;
};

Graph index_graph(const GraphInstance& g, const PigConfig& cfg) {
  Graph out;
  std::array<bool, gaitsynth::kTargetCount> seen{};
  std::size_t bodies = 0, forces = 0;
  for (std::uint32_t i = 0; i < g.nodes.size(); ++i) {
    const Node& n = g.nodes[i];
    if (is_joint(n.kind)) {
      if (n.slot >= gaitsynth::kTargetCount || seen[n.slot] || n.features.size() != kJointFeatures)
        throw DataError("graph: bad joint node " + std::to_string(i));
      seen[n.slot] = true;
      out.joint[n.slot] = i;
    } else if (n.kind == NodeKind::Body) {
      if (n.features.size() != kBodyFeatures) throw DataError("graph: bad body node");
      out.body = i;
      ++bodies;
    } else if (n.kind == NodeKind::LatentForce) {
      out.force = i;
      ++forces;
    } else if (n.kind == NodeKind::Vibration) {
      if (n.features.size() != cfg.vib_window)
        throw DataError("vibration window of " + std::to_string(n.features.size()) +
                        " samples, model expects " + std::to_string(cfg.vib_window));
      out.sensors.push_back(i);
    } else if (n.kind == NodeKind::Time && n.features.size() != kTimeFeatures) {
      throw DataError("graph: bad time node " + std::to_string(i));
    }
  }
  if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }) || bodies != 1 || forces != 1)
    throw DataError("graph needs 12 joint slots, one body and one latent force node");
  if (g.vib_valid > cfg.vib_window) throw DataError("vibration validity exceeds the window");
  return out;
}

bool has_edge(const GraphInstance& g, std::uint32_t src, std::uint32_t dst, EdgeKind k) {
  return std::any_of(g.edges.begin(), g.edges.end(),
                     [&](const Edge& e) { return e.src == src && e.dst == dst && e.kind == k; });
}

std::vector<Var> encode_sensors(Tape& t, const GraphInstance& g, const Graph& ix, const PigConfig& cfg,
                                const Normalizer& norm) {
  const LstmWeights w = lstm_weights(t, "pig.lstm");
  const std::size_t steps = frame_count(g.vib_valid, cfg.frame_length);
  std::vector<Var> out;
  std::vector<Var> frames(steps);
  for (std::uint32_t s : ix.sensors) {
    const auto& win = g.nodes[s].features;
    for (std::size_t k = 0; k < steps; ++k)
      frames[k] = t.constant(frame_of(win, g.vib_valid, cfg.frame_length, k, norm.vib_scale));
    out.push_back(lstm_run(t, w, frames));
  }
  return out;
}

Var zeros(Tape& t, std::size_t n) { return t.constant(std::vector<double>(n, 0.0)); }

Var sum_or_zero(Tape& t, std::span<const Var> parts, std::size_t n) {
  return parts.empty() ? zeros(t, n) : t.sum_n(parts);
}

// Attention-weighted sum of joint x body products. `states` is indexed by
// slot; masked slots are skipped. Optionally records the weights.
Var biomech_path(Tape& t, const BioVars& v, std::span<const Var> states, std::span<const double> body,
                 Var query, std::span<const bool> mask,
                 std::vector<std::array<double, gaitsynth::kTargetCount>>* weights) {
  Var B = t.matmul(v.bodyW, t.constant(body)) + v.bodyb;
  std::vector<std::size_t> slots;
  std::vector<Var> terms;
  for (std::size_t s = 0; s < states.size(); ++s) {
    if (!mask.empty() && !mask[s]) continue;
    Var parts[] = {t.sin(t.matmul(v.sinW, states[s])), t.cos(t.matmul(v.cosW, states[s]))};
    terms.push_back(t.concat(parts) * B);
    slots.push_back(s);
  }
  const std::size_t rows = t.shape(B).rows;
  if (terms.empty()) return zeros(t, rows);
  std::vector<Var> heads;
  for (const Head& h : v.heads) {
    Var q = t.matmul(h.Wq, query);
    std::vector<Var> scores;
    for (Var z : terms) scores.push_back(t.matmul(h.a, t.tanh(q + t.matmul(h.Wz, z))));
    Var alpha = t.softmax(t.concat(scores));
    if (weights) {
      std::array<double, gaitsynth::kTargetCount> w{};
      const auto a = t.value(alpha);
      for (std::size_t j = 0; j < slots.size(); ++j) w[slots[j]] = a[j];
      weights->push_back(w);
    }
    std::vector<Var> weighted;
    for (std::size_t j = 0; j < terms.size(); ++j) weighted.push_back(t.slice(alpha, j, 1) * terms[j]);
    heads.push_back(t.sum_n(weighted));
  }
  return t.scale(t.sum_n(heads), 1.0 / static_cast<double>(heads.size()));
}

Var embed(Tape& t, const std::string& group, std::span<const double> x) {
  return t.tanh(t.matmul(t.param("pig.embed." + group + ".W"), t.constant(x)) +
                t.param("pig.embed." + group + ".b"));
}

std::vector<Var> joint_embeddings(Tape& t, const GraphInstance& g, const Graph& ix) {
  std::vector<Var> out;
  for (std::uint32_t j : ix.joint) out.push_back(embed(t, "joint", g.nodes[j].features));
  return out;
}

}  // namespace

num::ParamStore init_pig_params(const PigConfig& cfg) {
  cfg.validate();
  const std::size_t H = cfg.hidden_dim, L = cfg.lstm_hidden;
  num::ParamStore p(cfg.seed);
  register_lstm(p, "pig.lstm", cfg.frame_length, L);
  const std::pair<const char*, std::size_t> inputs[] = {
      {"joint", kJointFeatures}, {"time", kTimeFeatures}, {"body", kBodyFeatures}, {"vibration", L}};
  for (const auto& [name, n] : inputs) {
    p.add("pig.embed." + std::string(name) + ".W", {H, n});
    p.add("pig.embed." + std::string(name) + ".b", {H, 1}, Init::Small);
  }
  p.add("pig.bio.sin.W", {sin_rows(L), H});
  p.add("pig.bio.cos.W", {L - sin_rows(L), H});
  p.add("pig.bio.body.W", {L, kBodyFeatures});
  p.add("pig.bio.body.b", {L, 1}, Init::Small);
  for (std::size_t k = 0; k < cfg.attention_heads; ++k) {
    const std::string pre = "pig.att." + std::to_string(k);
    p.add(pre + ".Wq", {H, H});
    p.add(pre + ".Wz", {H, L});
    p.add(pre + ".a", {1, H});
  }
  p.add("pig.force.Wv", {H, L});
  p.add("pig.force.Wb", {H, L});
  p.add("pig.force.U", {H, H});
  p.add("pig.force.b", {H, 1}, Init::Small);
  for (EdgeKind k : kEdgeKinds)
    for (bool fwd : {true, false}) {
      if (!has_message(k, fwd)) continue;
      p.add(msg_name(k, fwd) + ".W", {H, H});
      p.add(msg_name(k, fwd) + ".b", {H, 1}, Init::Small);
    }
  for (const char* grp : kGroups) {
    const std::string pre = "pig.update." + std::string(grp);
    p.add(pre + ".S", {H, H});
    p.add(pre + ".M", {H, H});
    p.add(pre + ".c", {H, 1}, Init::Small);
  }
  p.add("pig.readout.w", {1, H});
  p.add("pig.readout.b", {1, 1}, Init::Zeros);
  return p;
}

ForceEmbedding force_aggregate(Tape& t, const GraphInstance& g, const PigConfig& cfg, const Normalizer& norm) {
  const Graph ix = index_graph(g, cfg);
  ForceEmbedding out;
  out.sensors = encode_sensors(t, g, ix, cfg, norm);
  std::vector<Var> wired;
  for (std::size_t s = 0; s < ix.sensors.size(); ++s)
    if (has_edge(g, ix.sensors[s], ix.force, EdgeKind::ForceConstraint)) wired.push_back(out.sensors[s]);
  out.total = sum_or_zero(t, wired, cfg.lstm_hidden);
  return out;
}

BiomechEmbedding biomech_constrain(Tape& t, const GraphInstance& g, const PigConfig& cfg,
                                   std::span<const bool> joint_mask) {
  if (!joint_mask.empty() && joint_mask.size() != gaitsynth::kTargetCount)
    throw std::invalid_argument("biomech_constrain: mask must have 12 entries");
  const Graph ix = index_graph(g, cfg);
  const BioVars v = bio_vars(t, cfg);
  BiomechEmbedding out;
  const auto states = joint_embeddings(t, g, ix);
  out.total = biomech_path(t, v, states, g.nodes[ix.body].features, zeros(t, cfg.hidden_dim), joint_mask,
                           &out.attention);
  return out;
}

PigOutput pig_forward(Tape& t, const GraphInstance& g, const PigConfig& cfg, const Normalizer& norm) {
  const Graph ix = index_graph(g, cfg);
  const std::size_t H = cfg.hidden_dim, L = cfg.lstm_hidden;
  const std::size_t n = g.nodes.size();

  // Initial states.
  std::vector<Var> h(n);
  const auto enc = encode_sensors(t, g, ix, cfg, norm);
  for (std::size_t s = 0; s < ix.sensors.size(); ++s)
    h[ix.sensors[s]] = t.tanh(t.matmul(t.param("pig.embed.vibration.W"), enc[s]) +
                              t.param("pig.embed.vibration.b"));
  for (std::uint32_t i = 0; i < n; ++i) {
    const Node& node = g.nodes[i];
    if (is_joint(node.kind)) h[i] = embed(t, "joint", node.features);
    else if (node.kind == NodeKind::Time) h[i] = embed(t, "time", node.features);
    else if (node.kind == NodeKind::Body) h[i] = embed(t, "body", node.features);
  }
  h[ix.force] = zeros(t, H);

  // Physics wiring.
  std::vector<Var> wired;
  for (std::size_t s = 0; s < ix.sensors.size(); ++s)
    if (has_edge(g, ix.sensors[s], ix.force, EdgeKind::ForceConstraint)) wired.push_back(enc[s]);
  const Var f_vib = sum_or_zero(t, wired, L);
  const bool body_wired = has_edge(g, ix.body, ix.force, EdgeKind::ForceConstraint);
  const BioVars bio = bio_vars(t, cfg);
  const Var Wv = t.param("pig.force.Wv"), Wb = t.param("pig.force.Wb"), U = t.param("pig.force.U"),
            fb = t.param("pig.force.b");

  std::map<std::pair<EdgeKind, bool>, std::pair<Var, Var>> maps;
  for (EdgeKind k : kEdgeKinds)
    for (bool fwd : {true, false})
      if (has_message(k, fwd))
        maps[{k, fwd}] = {t.param(msg_name(k, fwd) + ".W"), t.param(msg_name(k, fwd) + ".b")};
  std::array<std::array<Var, 3>, 4> upd;
  for (std::size_t gi = 0; gi < kGroups.size(); ++gi) {
    const std::string pre = "pig.update." + std::string(kGroups[gi]);
    upd[gi] = {t.param(pre + ".S"), t.param(pre + ".M"), t.param(pre + ".c")};
  }

  std::vector<Var> penalties;
  for (std::size_t r = 0; r < cfg.message_rounds; ++r) {
    std::vector<Var> joint_states;
    for (std::uint32_t j : ix.joint) joint_states.push_back(h[j]);
    const Var f_bio = body_wired ? biomech_path(t, bio, joint_states, g.nodes[ix.body].features, h[ix.force],
                                                {}, nullptr)
                                 : zeros(t, L);
    const Var diff = f_vib - f_bio;
    penalties.push_back(t.scale(t.sum(diff * diff), 1.0 / static_cast<double>(L)));
    const Var force_next =
        t.tanh(t.matmul(Wv, f_vib) + t.matmul(Wb, f_bio) + t.matmul(U, h[ix.force]) + fb);

    // One message per (source, kind, direction), reused across its edges.
    std::map<std::tuple<std::uint32_t, EdgeKind, bool>, Var> cache;
    std::vector<std::vector<Var>> inbox(n);
    auto send = [&](std::uint32_t src, std::uint32_t dst, EdgeKind k, bool fwd) {
      auto key = std::make_tuple(src, k, fwd);
      auto it = cache.find(key);
      if (it == cache.end()) {
        const auto& [W, b] = maps.at({k, fwd});
        it = cache.emplace(key, t.tanh(t.matmul(W, h[src]) + b)).first;
      }
      inbox[dst].push_back(it->second);
    };
    for (const Edge& e : g.edges) {
      if (has_message(e.kind, true)) send(e.src, e.dst, e.kind, true);
      send(e.dst, e.src, e.kind, false);
    }
    std::vector<Var> next(h);
    for (std::uint32_t i = 0; i < n; ++i) {
      const int gi = group_of(g.nodes[i].kind);
      if (gi < 0) continue;
      const auto& [S, M, c] = upd[static_cast<std::size_t>(gi)];
      Var pre = t.matmul(S, h[i]) + c;
      if (!inbox[i].empty())
        pre = pre + t.matmul(M, t.scale(t.sum_n(inbox[i]), 1.0 / static_cast<double>(inbox[i].size())));
      next[i] = h[i] + t.tanh(pre);
    }
    next[ix.force] = force_next;
    h = std::move(next);
  }

  const Var w = t.param("pig.readout.w"), b = t.param("pig.readout.b");
  std::vector<Var> ys;
  for (std::uint32_t j : ix.joint) ys.push_back(t.matmul(w, h[j]) + b);
  const Var y = t.concat(ys);
  PigOutput out;
  out.angles = y * t.constant(norm.target_std) + t.constant(norm.target_mean);
  out.consistency = t.scale(t.sum_n(penalties), 1.0 / static_cast<double>(penalties.size()));
  return out;
}

std::array<double, gaitsynth::kTargetCount> pig_predict(const num::ParamStore& params, const GraphInstance& g,
                                                        const PigConfig& cfg, const Normalizer& norm) {
  Tape t(params);
  const auto out = pig_forward(t, g, cfg, norm);
  std::array<double, gaitsynth::kTargetCount> y{};
  const auto v = t.value(out.angles);
  std::copy(v.begin(), v.end(), y.begin());
  return y;
}

Var pig_loss(Tape& t, Var pred, const gaitsynth::TargetAngles& target, Var consistency, double lambda) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("pig_loss: lambda must be non-negative");
  const Var d = pred - t.constant(target.values);
  Var loss = t.mean(d * d);
  if (lambda != 0.0) loss = loss + t.scale(consistency, lambda);
  return loss;
}

double pig_loss(std::span<const double> pred, const gaitsynth::TargetAngles& target, double consistency,
                double lambda) {
  if (pred.size() != gaitsynth::kTargetCount) throw std::invalid_argument("pig_loss: need 12 predictions");
  if (!(lambda >= 0.0)) throw std::invalid_argument("pig_loss: lambda must be non-negative");
  double sq = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!std::isfinite(pred[i]) || !std::isfinite(target[i]))
      throw NumericError("pig_loss: non-finite angle at slot " + std::to_string(i));
    sq += (pred[i] - target[i]) * (pred[i] - target[i]);
  }
  if (!std::isfinite(consistency)) throw NumericError("pig_loss: non-finite consistency");
  const double mse = sq / static_cast<double>(pred.size());
  return lambda == 0.0 ? mse : mse + lambda * consistency;
}

}  // namespace gaitvib::pig
