#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "gaitvib/core/error.hpp"
#include "gaitvib/pig/baseline.hpp"
#include "gaitvib/pig/checkpoint.hpp"
#include "gaitvib/pig/evaluate.hpp"
#include "gaitvib/pig/graph.hpp"
#include "gaitvib/pig/model.hpp"
#include "gaitvib/pig/training.hpp"
#include "support/fd_oracle.hpp"
#include "support/pig_fixtures.hpp"

using namespace gaitvib;
using namespace gaitvib::pig;

namespace {

const std::vector<GraphInstance>& dataset() {
  static const auto graphs = testing::synthetic_graphs(2, 2);
  return graphs;
}

PigConfig small_config() {
  PigConfig c;
  c.hidden_dim = 4;
  c.attention_heads = 2;
  c.lstm_hidden = 4;
  c.message_rounds = 2;
  c.vib_window = 24;
  c.frame_length = 8;
  return c;
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

// Sensor nodes of a graph in node order.
std::vector<std::uint32_t> sensor_nodes(const GraphInstance& g) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 0; i < g.nodes.size(); ++i)
    if (g.nodes[i].kind == NodeKind::Vibration) out.push_back(i);
  return out;
}

struct ThreadCount {
  explicit ThreadCount(const char* n) { setenv("GAITVIB_THREADS", n, 1); }
  ~ThreadCount() { unsetenv("GAITVIB_THREADS"); }
};

}  // namespace

TEST_CASE("build_graph: node and edge counts of a 4-sensor trial") {
  const auto& g = dataset().front();
  CHECK(g.nodes.size() == 20);
  CHECK(g.count(NodeKind::Hip) + g.count(NodeKind::Knee) + g.count(NodeKind::Ankle) == 12);
  CHECK(g.count(NodeKind::Time) == 2);
  CHECK(g.count(NodeKind::Vibration) == 4);
  CHECK(g.count(NodeKind::Body) == 1);
  CHECK(g.count(NodeKind::LatentForce) == 1);
  CHECK(g.count(EdgeKind::Spatial) == 8);
  CHECK(g.count(EdgeKind::Temporal) == 9);
  CHECK(g.count(EdgeKind::Indirect) == 48);
  CHECK(g.count(EdgeKind::TimeConstraint) == 24);
  CHECK(g.count(EdgeKind::BodyDimension) == 12);
  CHECK(g.count(EdgeKind::ForceConstraint) == 5);
  CHECK_NOTHROW(g.validate());
  for (const auto& n : g.nodes)
    if (n.kind == NodeKind::Vibration) {
      CHECK(n.features.size() == kDefaultVibWindow);
      CHECK(std::all_of(n.features.begin() + static_cast<std::ptrdiff_t>(g.vib_valid), n.features.end(),
                        [](double v) { return v == 0.0; }));
    }
}

TEST_CASE("build_graph: every vibration node reaches every joint once") {
  const auto& g = dataset().front();
  std::set<std::pair<std::uint32_t, std::uint32_t>> pairs;
  for (const auto& e : g.edges)
    if (e.kind == EdgeKind::Indirect) pairs.insert({e.src, e.dst});
  CHECK(pairs.size() == 48);
}

TEST_CASE("build_graph: trial mismatch and oversized cycles are rejected") {
  floorsim::FloorModel floor;
  const auto subject = gaitsynth::make_subject(0, 3);
  const auto trial = gaitsynth::synth_trial(gaitsynth::GaitType::Normal, subject, 5, 17, floor);
  auto cycle = trial.cycles().front();
  CHECK_NOTHROW(build_graph(trial, cycle));
  auto other = cycle;
  other.trial_id = 6;
  CHECK_THROWS_AS(build_graph(trial, other), DataError);
  CHECK_THROWS_AS(build_graph(trial, cycle, 100), DataError);
  auto late = cycle;
  late.start += 100.0;
  late.end += 100.0;
  late.foot_off += 100.0;
  CHECK_THROWS_AS(build_graph(trial, late), DataError);
}

TEST_CASE("validate rejects disallowed kind pairs and disconnected graphs") {
  auto g = dataset().front();
  auto bad = g;
  bad.edges.front().kind = EdgeKind::BodyDimension;  // hip -> knee as body dimension
  CHECK_THROWS_AS(bad.validate(), DataError);
  auto cut = g;
  std::erase_if(cut.edges, [&](const Edge& e) { return e.dst == 19 || e.src == 19; });
  CHECK_THROWS_AS(cut.validate(), DataError);
}

TEST_CASE("force_aggregate is exactly invariant to sensor order") {
  const auto& g = dataset().front();
  PigConfig cfg;
  const auto params = init_pig_params(cfg);
  num::Tape t1(params), t2(params);
  const auto a = t1.value(force_aggregate(t1, g, cfg).total);

  // Swap the signals of the sensor nodes.
  auto swapped = g;
  const auto s = sensor_nodes(g);
  std::swap(swapped.nodes[s[0]].features, swapped.nodes[s[3]].features);
  std::swap(swapped.nodes[s[1]].features, swapped.nodes[s[2]].features);
  const auto b = t2.value(force_aggregate(t2, swapped, cfg).total);
  REQUIRE(a.size() == cfg.lstm_hidden);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("force_aggregate: zero windows give four times the zero-input response") {
  auto g = dataset().front();
  for (auto& n : g.nodes)
    if (n.kind == NodeKind::Vibration) std::fill(n.features.begin(), n.features.end(), 0.0);
  PigConfig cfg;
  const auto params = init_pig_params(cfg);
  num::Tape t(params);
  const auto out = force_aggregate(t, g, cfg);
  const auto one = t.value(out.sensors.front());
  const auto total = t.value(out.total);
  for (std::size_t i = 0; i < one.size(); ++i) CHECK(total[i] == doctest::Approx(4.0 * one[i]).epsilon(1e-15));
  num::Tape t2(params);
  const auto again = t2.value(force_aggregate(t2, g, cfg).total);
  for (std::size_t i = 0; i < one.size(); ++i) CHECK(again[i] == total[i]);
}

TEST_CASE("force_aggregate rejects a window of the wrong length") {
  PigConfig cfg;
  cfg.vib_window = 512;
  const auto params = init_pig_params(cfg);
  num::Tape t(params);
  CHECK_THROWS_AS(force_aggregate(t, dataset().front(), cfg), DataError);
}

TEST_CASE("force_aggregate gradient matches central differences") {
  const PigConfig cfg = small_config();
  std::mt19937_64 rng(4);
  const auto g = testing::small_graph(dataset().front(), cfg.vib_window, rng);
  const auto params = init_pig_params(cfg);
  auto objective = [&](num::Tape& t) {
    const auto f = force_aggregate(t, g, cfg).total;
    return t.sum(f * f);
  };
  const auto analytic = num::grad(objective, params);
  const auto fd = testing::central_differences(
      [&](const num::ParamStore& p) {
        num::Tape t(p);
        return t.item(objective(t));
      },
      params);
  CHECK(testing::max_relative_error(analytic, fd) < 1e-4);
}

TEST_CASE("biomech_constrain: attention is a distribution per head") {
  const auto& g = dataset().front();
  PigConfig cfg;
  auto params = init_pig_params(cfg);
  num::Tape t(params);
  const auto out = biomech_constrain(t, g, cfg);
  REQUIRE(out.attention.size() == cfg.attention_heads);
  for (const auto& head : out.attention) {
    double sum = 0.0;
    for (double w : head) {
      CHECK(w >= 0.0);
      sum += w;
    }
    CHECK(std::abs(sum - 1.0) < 1e-9);
  }
  std::array<bool, 12> mask{};
  mask.fill(true);
  mask[5] = false;
  num::Tape t2(params);
  const auto masked = biomech_constrain(t2, g, cfg, mask);
  for (const auto& head : masked.attention) {
    CHECK(head[5] == 0.0);
    CHECK(std::abs(std::accumulate(head.begin(), head.end(), 0.0) - 1.0) < 1e-9);
  }
}

TEST_CASE("biomech_constrain: a masked joint's features do not reach the output") {
  auto g = dataset().front();
  PigConfig cfg;
  const auto params = init_pig_params(cfg);
  std::array<bool, 12> mask{};
  mask.fill(true);
  mask[7] = false;
  num::Tape t1(params), t2(params);
  const auto before = t1.value(biomech_constrain(t1, g, cfg, mask).total);
  for (auto& n : g.nodes)
    if (is_joint(n.kind) && n.slot == 7) std::fill(n.features.begin(), n.features.end(), 0.0);
  const auto after = t2.value(biomech_constrain(t2, g, cfg, mask).total);
  for (std::size_t i = 0; i < before.size(); ++i) CHECK(before[i] == after[i]);

  // Without the mask the same edit does change the output.
  num::Tape t3(params), t4(params);
  const auto open_before = t3.value(biomech_constrain(t3, dataset().front(), cfg).total);
  const auto open_after = t4.value(biomech_constrain(t4, g, cfg).total);
  double diff = 0.0;
  for (std::size_t i = 0; i < open_before.size(); ++i) diff += std::abs(open_before[i] - open_after[i]);
  CHECK(diff > 0.0);
}

TEST_CASE("biomech_constrain gradient matches central differences") {
  const PigConfig cfg = small_config();
  std::mt19937_64 rng(6);
  const auto g = testing::small_graph(dataset().front(), cfg.vib_window, rng);
  auto params = init_pig_params(cfg);
  auto objective = [&](num::Tape& t) {
    const auto f = biomech_constrain(t, g, cfg).total;
    return t.sum(f * f);
  };
  const auto analytic = num::grad(objective, params);
  const auto fd = testing::central_differences(
      [&](const num::ParamStore& p) {
        num::Tape t(p);
        return t.item(objective(t));
      },
      params);
  CHECK(testing::max_relative_error(analytic, fd) < 1e-4);
}

TEST_CASE("pig_forward is deterministic and invariant to node relabeling") {
  const auto& g = dataset().front();
  PigConfig cfg;
  const auto params = init_pig_params(cfg);
  Normalizer norm;
  const auto a = pig_predict(params, g, cfg, norm);
  const auto b = pig_predict(params, g, cfg, norm);
  CHECK(a == b);

  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<std::uint32_t> perm(g.nodes.size());
    std::iota(perm.begin(), perm.end(), 0u);
    std::shuffle(perm.begin(), perm.end(), rng);
    auto edges_shuffled = relabel(g, perm);
    std::shuffle(edges_shuffled.edges.begin(), edges_shuffled.edges.end(), rng);
    const auto c = pig_predict(params, edges_shuffled, cfg, norm);
    for (std::size_t k = 0; k < 12; ++k) CHECK(c[k] == a[k]);
  }
}

TEST_CASE("pig_forward needs the slices registered for its config") {
  PigConfig cfg;
  const auto lstm = init_lstm_params(cfg);
  CHECK_THROWS_AS(pig_predict(lstm, dataset().front(), cfg, {}), std::out_of_range);
  PigConfig more = cfg;
  more.attention_heads = 3;
  CHECK_THROWS_AS(pig_predict(init_pig_params(cfg), dataset().front(), more, {}), std::out_of_range);
}

TEST_CASE("end-to-end loss gradient matches central differences on 20 small graphs") {
  PigConfig cfg = small_config();
  std::mt19937_64 rng(2025);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const auto& real = dataset()[static_cast<std::size_t>(k) % dataset().size()];
    const auto g = testing::small_graph(real, cfg.vib_window, rng);
    cfg.seed = 100 + static_cast<std::uint64_t>(k);
    const Model m = init_model(ModelKind::Pig, cfg);
    std::vector<double> analytic(m.params.size(), 0.0);
    loss_and_grad(m, g, analytic);
    const auto fd = testing::central_differences(
        [&](const num::ParamStore& p) {
          Model q = m;
          q.params = p;
          return loss_value(q, g);
        },
        m.params);
    worst = std::max(worst, testing::max_relative_error(analytic, fd));
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("baseline gradient matches central differences") {
  PigConfig cfg = small_config();
  std::mt19937_64 rng(8);
  const auto g = testing::small_graph(dataset().front(), cfg.vib_window, rng);
  const Model m = init_model(ModelKind::Lstm, cfg);
  std::vector<double> analytic(m.params.size(), 0.0);
  loss_and_grad(m, g, analytic);
  const auto fd = testing::central_differences(
      [&](const num::ParamStore& p) {
        Model q = m;
        q.params = p;
        return loss_value(q, g);
      },
      m.params);
  CHECK(testing::max_relative_error(analytic, fd) < 1e-4);
}

TEST_CASE("dead-parameter audit: every slice receives gradient at random init") {
  const auto& graphs = dataset();
  for (ModelKind kind : {ModelKind::Pig, ModelKind::Lstm}) {
    CAPTURE(to_string(kind));
    const Model m = init_model(kind, PigConfig{}, fit_normalizer(graphs, all_indices(graphs.size())));
    std::vector<double> any(m.params.size(), 0.0);
    for (std::size_t i = 0; i < 4; ++i) {
      std::vector<double> g(m.params.size(), 0.0);
      loss_and_grad(m, graphs[i], g);
      for (std::size_t k = 0; k < g.size(); ++k) any[k] = std::max(any[k], std::abs(g[k]));
    }
    for (const auto& name : m.params.names_by_offset()) {
      const auto& s = m.params.slice(name);
      const bool alive = std::any_of(any.begin() + static_cast<std::ptrdiff_t>(s.offset),
                                     any.begin() + static_cast<std::ptrdiff_t>(s.offset + s.shape.size()),
                                     [](double v) { return v > 0.0; });
      CHECK_MESSAGE(alive, name);
    }
  }
}

TEST_CASE("pig_loss examples") {
  gaitsynth::TargetAngles target;
  for (std::size_t i = 0; i < 12; ++i) target[i] = 3.0 * static_cast<double>(i) - 10.0;
  std::vector<double> pred(target.values.begin(), target.values.end());
  CHECK(pig_loss(pred, target, 0.0, 0.1) == 0.0);
  for (auto& p : pred) p += 1.0;
  CHECK(pig_loss(pred, target, 0.0, 0.1) == 1.0);
  CHECK(pig_loss(pred, target, 0.7, 0.0) == 1.0);
  CHECK(pig_loss(pred, target, 0.5, 0.1) == doctest::Approx(1.05).epsilon(1e-15));
  pred[3] = std::nan("");
  CHECK_THROWS_AS(pig_loss(pred, target, 0.0, 0.1), NumericError);
  CHECK_THROWS_AS(pig_loss(std::vector<double>(3, 0.0), target, 0.0, 0.1), std::invalid_argument);
}

TEST_CASE("overfit one sample: training MSE below 0.01 deg^2 within 200 epochs") {
  const auto& graphs = dataset();
  const std::vector<std::size_t> one{0};
  for (ModelKind kind : {ModelKind::Pig, ModelKind::Lstm}) {
    CAPTURE(to_string(kind));
    PigConfig cfg;
    cfg.epochs = 200;
    cfg.batch_size = 1;
    cfg.patience = 200;
    cfg.learning_rate = 1e-2;
    const auto r = train(kind, cfg, graphs, one, {});
    const auto y = predict(r.model, graphs[0]);
    const double mse = pig_loss(y, graphs[0].targets, 0.0, 0.0);
    CHECK(mse < 0.01);
  }
}

TEST_CASE("training is bit-identical across runs and thread counts") {
  const auto& graphs = dataset();
  const auto idx = all_indices(graphs.size());
  const std::vector<std::size_t> train_idx(idx.begin(), idx.begin() + 18);
  const std::vector<std::size_t> val_idx(idx.begin() + 18, idx.end());
  PigConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 6;
  for (ModelKind kind : {ModelKind::Pig, ModelKind::Lstm}) {
    CAPTURE(to_string(kind));
    TrainResult a, b;
    {
      ThreadCount one("1");
      a = train(kind, cfg, graphs, train_idx, val_idx);
    }
    {
      ThreadCount three("3");
      b = train(kind, cfg, graphs, train_idx, val_idx);
    }
    CHECK(a.history == b.history);
    CHECK(a.model == b.model);
  }
}

TEST_CASE("learning rate 0 leaves parameters unchanged and the history flat") {
  const auto& graphs = dataset();
  const auto idx = all_indices(graphs.size());
  PigConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 8;
  cfg.learning_rate = 0.0;
  for (ModelKind kind : {ModelKind::Pig, ModelKind::Lstm}) {
    const auto r = train(kind, cfg, graphs, idx, {});
    CHECK(r.model.params.values() == init_model(kind, cfg).params.values());
    REQUIRE(r.history.size() == 3);
    for (const auto& e : r.history) {
      CHECK(e.train_loss == r.history.front().train_loss);
      CHECK(e.val_mae == r.history.front().val_mae);
    }
  }
}

TEST_CASE("divergence names the epoch") {
  auto graphs = dataset();
  graphs[2].targets[4] = std::nan("");
  PigConfig cfg;
  cfg.epochs = 2;
  try {
    (void)train(ModelKind::Lstm, cfg, graphs, all_indices(graphs.size()), {});
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("epoch 1") != std::string::npos);
  }
  CHECK_THROWS_AS(train(ModelKind::Pig, cfg, graphs, {}, {}), DataError);
}

TEST_CASE("every edge kind changes the predictions of a trained model") {
  const auto& graphs = dataset();
  PigConfig cfg;
  cfg.epochs = 4;
  cfg.batch_size = 4;
  const auto r = train(ModelKind::Pig, cfg, graphs, all_indices(graphs.size()), {});
  const auto& g = graphs[1];
  const auto full = predict(r.model, g);
  for (EdgeKind k : kEdgeKinds) {
    CAPTURE(to_string(k));
    const auto cut = predict(r.model, without_edges(g, k));
    double diff = 0.0;
    for (std::size_t i = 0; i < 12; ++i) diff = std::max(diff, std::abs(cut[i] - full[i]));
    CHECK(diff > 1e-6);
  }
}

TEST_CASE("baseline: zero input gives one output whatever the sensor order") {
  auto g = dataset().front();
  for (auto& n : g.nodes)
    if (n.kind == NodeKind::Vibration) std::fill(n.features.begin(), n.features.end(), 0.0);
  auto h = dataset()[3];
  for (auto& n : h.nodes)
    if (n.kind == NodeKind::Vibration) std::fill(n.features.begin(), n.features.end(), 0.0);
  h.vib_valid = g.vib_valid;
  PigConfig cfg;
  const auto params = init_lstm_params(cfg);
  const auto a = lstm_predict(params, g, cfg, {});
  std::vector<std::uint32_t> perm(g.nodes.size());
  std::iota(perm.begin(), perm.end(), 0u);
  const auto s = sensor_nodes(g);
  std::swap(perm[s[0]], perm[s[2]]);
  CHECK(lstm_predict(params, relabel(g, perm), cfg, {}) == a);
  CHECK(lstm_predict(params, h, cfg, {}) == a);
}

TEST_CASE("evaluate: zero, constant-offset and weighted-mean identities") {
  const auto& graphs = dataset();
  std::vector<Prediction> exact, offset;
  for (const auto& g : graphs) {
    Prediction p{{}, g.targets, g.gait_type};
    std::copy(g.targets.values.begin(), g.targets.values.end(), p.angles.begin());
    exact.push_back(p);
    for (auto& a : p.angles) a += 2.0;
    offset.push_back(p);
  }
  const auto zero = evaluate(exact);
  CHECK(zero.rows.size() == 22);
  for (const auto& r : zero.rows) CHECK(r.mae == 0.0);
  const auto two = evaluate(offset);
  for (const auto& r : two.rows) CHECK(r.mae == doctest::Approx(2.0).epsilon(1e-12));

  // A trained-ish model gives uneven cells; the identity must still hold.
  const Model m = init_model(ModelKind::Lstm, PigConfig{}, fit_normalizer(graphs, all_indices(graphs.size())));
  const auto rep = evaluate(m, graphs, all_indices(graphs.size()));
  double weighted = 0.0;
  std::size_t cycles = 0;
  for (const auto& r : rep.rows)
    if (r.group == "gait_type") {
      weighted += r.mae * static_cast<double>(r.cycles);
      cycles += r.cycles;
    }
  CHECK(cycles == graphs.size());
  CHECK(std::abs(weighted / static_cast<double>(cycles) - rep.at("overall", "all").mae) < 1e-9);
  CHECK_THROWS_AS(evaluate(std::vector<Prediction>{}), DataError);
  CHECK(report_csv(rep).starts_with("group,key,mae_deg,cycles\n"));
}

TEST_CASE("checkpoint round-trips bit-identically and rejects foreign layouts") {
  for (ModelKind kind : {ModelKind::Pig, ModelKind::Lstm}) {
    PigConfig cfg;
    cfg.seed = 77;
    cfg.lambda = 0.01;
    Model m = init_model(kind, cfg, fit_normalizer(dataset(), all_indices(4)));
    m.params.values()[3] = 1.0 / 3.0;
    const CheckpointMeta meta{"abc123", 42};
    std::stringstream ss;
    write_checkpoint(ss, m, meta);
    const std::string text = ss.str();
    const auto back = read_checkpoint(ss);
    CHECK(back.model == m);
    CHECK(back.meta == meta);

    std::string wrong_version = text;
    wrong_version.replace(wrong_version.find(" 1\n"), 3, " 9\n");
    std::istringstream v(wrong_version);
    CHECK_THROWS_AS(read_checkpoint(v), ConfigError);

    std::string wrong_layout = text;
    const auto at = wrong_layout.find("config.hidden_dim 32");
    wrong_layout.replace(at, 20, "config.hidden_dim 16");
    const auto at2 = wrong_layout.find("config.lstm_hidden 32");
    wrong_layout.replace(at2, 21, "config.lstm_hidden 16");
    std::istringstream l(wrong_layout);
    CHECK_THROWS_AS(read_checkpoint(l), ConfigError);

    std::string garbled = text;
    garbled.replace(garbled.rfind("\nend"), 1, "\nx\n");
    std::istringstream gb(garbled);
    CHECK_THROWS_AS(read_checkpoint(gb), DataError);
  }
}

TEST_CASE("splits keep trials whole and are reproducible") {
  const auto graphs = testing::synthetic_graphs(3, 5, 21);
  const auto a = make_split(graphs, Protocol::PerTrial, 4);
  const auto b = make_split(graphs, Protocol::PerTrial, 4);
  CHECK(a.train == b.train);
  CHECK(a.test == b.test);
  CHECK(a.train.size() + a.val.size() + a.test.size() == graphs.size());
  std::map<std::uint64_t, std::set<int>> where;
  for (auto i : a.train) where[graphs[i].cycle.trial_id].insert(0);
  for (auto i : a.val) where[graphs[i].cycle.trial_id].insert(1);
  for (auto i : a.test) where[graphs[i].cycle.trial_id].insert(2);
  for (const auto& [id, parts] : where) CHECK(parts.size() == 1);
  // 5 trials per (subject, type): one test and one validation trial each.
  CHECK(a.test.size() == 12 * 3);
  CHECK(a.val.size() == 12 * 3);

  const auto loso = make_split(graphs, Protocol::LeaveOneSubjectOut, 4);
  CHECK(loso.held_out_subject == 1);
  for (auto i : loso.test) CHECK(graphs[i].subject_id == 1);
  for (auto i : loso.train) CHECK(graphs[i].subject_id != 1);
}

TEST_CASE("config validation names the field") {
  PigConfig c;
  c.attention_heads = 0;
  try {
    c.validate();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("attention_heads") != std::string::npos);
  }
}
