// Acceptance suite: one PASS/FAIL line per criterion, details indented below.
// Criteria to run may be given as arguments (e.g. "acceptance_tests 1 4");
// the default is all of them. Exit status is the number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gaitvib/app/commands.hpp"
#include "gaitvib/app/config.hpp"
#include "gaitvib/app/dataset.hpp"
#include "gaitvib/biomech/inverse_dynamics.hpp"
#include "gaitvib/core/modal.hpp"
#include "gaitvib/core/parallel.hpp"
#include "gaitvib/floorsim/floor.hpp"
#include "gaitvib/pig/evaluate.hpp"
#include "gaitvib/pig/training.hpp"
#include "support/fd_oracle.hpp"
#include "support/pig_fixtures.hpp"

using namespace gaitvib;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
  bool pass = false;
  std::vector<std::string> details;

  void note(const std::string& s) { details.push_back(s); }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

// 1. Damped free vibration against the closed form.
Verdict integrator_oracle() {
  Verdict v;
  const num::ModalOscillator osc{2000.0, 0.05, 12.0};
  const double dt = 1e-3, u0 = 0.01, zeta = osc.damping_ratio, wn = osc.omega();
  const double wd = wn * std::sqrt(1.0 - zeta * zeta);
  const std::vector<double> force(2000, 0.0);
  const auto t0 = Clock::now();
  const auto r = num::integrate_modal(osc, force, dt, u0, 0.0);
  const double elapsed = seconds_since(t0);
  double worst = 0.0;
  for (std::size_t i = 0; i < force.size(); ++i) {
    const double t = dt * static_cast<double>(i);
    const double exact = u0 * std::exp(-zeta * wn * t) * (std::cos(wd * t) + zeta * wn / wd * std::sin(wd * t));
    worst = std::max(worst, std::abs(r.displacement[i] - exact));
  }
  v.note("max abs error " + fmt("%.3e", worst) + " m over 2000 steps (limit 1e-3), runtime " +
         fmt("%.4f", elapsed) + " s (limit 1)");
  v.pass = worst < 1e-3 && elapsed < 1.0;
  return v;
}

biomech::JointTrajectory periodic_leg(std::size_t n, double period, double phase) {
  biomech::JointTrajectory t;
  for (std::size_t i = 0; i < n; ++i) {
    const double ph = 2.0 * std::numbers::pi * (static_cast<double>(i) / 100.0 / period + phase);
    t.hip.push_back(12.0 + 20.0 * std::cos(ph) - 3.0 * std::sin(2 * ph));
    t.knee.push_back(22.0 - 2.0 * std::cos(ph) - 14.0 * std::cos(2 * ph) - 18.0 * std::sin(ph) + 5.0 * std::sin(2 * ph));
    t.ankle.push_back(1.0 + 6.0 * std::sin(ph) - 9.0 * std::sin(2 * ph));
  }
  return t;
}

std::vector<bool> stance_mask(std::size_t n, double period, double phase, double stance) {
  std::vector<bool> m(n);
  for (std::size_t i = 0; i < n; ++i) {
    double ph = static_cast<double>(i) / 100.0 / period + phase;
    m[i] = ph - std::floor(ph) < stance;
  }
  return m;
}

// 2. Quiet standing and impulse-momentum.
Verdict biomechanics_oracle() {
  Verdict v;
  double worst_static = 0.0;
  for (double mass : {45.0, 80.0, 123.4}) {
    const biomech::Anthropometry a{mass, 0.43, 0.43, 0.27, 1.78};
    biomech::JointTrajectory pose;
    pose.hip.assign(50, 5.0);
    pose.knee.assign(50, 3.0);
    pose.ankle.assign(50, 2.0);
    const auto grf = biomech::inverse_dynamics(pose, a, std::vector<bool>(50, true));
    for (std::size_t i = 1; i + 1 < 50; ++i)
      worst_static = std::max(worst_static, std::abs(grf.vertical[i] - mass * biomech::kGravity));
  }
  double worst_periodic = 0.0;
  for (double period : {1.0, 1.1, 1.3}) {
    const auto per = static_cast<std::size_t>(std::lround(period * 100.0));
    const std::size_t n = per * 3 + 1;
    const biomech::Anthropometry a{72.0, 0.43, 0.43, 0.27, 1.78};
    const auto total = biomech::inverse_dynamics(periodic_leg(n, period, 0.5), periodic_leg(n, period, 0.0), a,
                                                 stance_mask(n, period, 0.5, 0.62), stance_mask(n, period, 0.0, 0.62))
                           .total();
    double sum = 0.0;
    for (std::size_t i = per / 2; i < per / 2 + 2 * per; ++i) sum += total.vertical[i];
    const double weight = a.body_mass * biomech::kGravity;
    worst_periodic = std::max(worst_periodic, std::abs(sum / static_cast<double>(2 * per) - weight) / weight);
  }
  v.note("quiet standing max |GRF - m g| " + fmt("%.3e", worst_static) + " N (limit 1e-9)");
  v.note("periodic gait max |mean GRF - m g| / m g " + fmt("%.4f", worst_periodic) + " (limit 0.02)");
  v.pass = worst_static < 1e-9 && worst_periodic < 0.02;
  return v;
}

floorsim::Footfall footfall(floorsim::Point p, double t0, double peak) {
  floorsim::Footfall f;
  f.sample_rate = 100.0;
  f.start_time = t0;
  for (int i = 0; i <= 60; ++i) f.force.push_back(peak * std::pow(std::sin(std::numbers::pi * i / 60.0), 2));
  f.position = p;
  return f;
}

double max_abs_diff(const floorsim::VibrationRecord& a, const floorsim::VibrationRecord& b, double scale_b) {
  double worst = 0.0;
  for (std::size_t s = 0; s < a.sensors(); ++s)
    for (std::size_t i = 0; i < a.samples(); ++i)
      worst = std::max(worst, std::abs(a.signals[s][i] - scale_b * b.signals[s][i]));
  return worst;
}

// 3. Linearity of the noiseless force-to-voltage chain and attenuation order.
Verdict lti_suite() {
  Verdict v;
  floorsim::FloorModel floor;
  floor.noise_std = 0.0;
  floor.modes.push_back({1500.0, 0.03, 21.0});
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ux(0.0, 4.0), uy(-1.0, 1.0), amp(300.0, 1200.0), t0(0.0, 0.5);
  double superposition = 0.0, scaling = 0.0;
  for (int k = 0; k < 20; ++k) {
    const auto s1 = footfall({ux(rng), uy(rng)}, t0(rng), amp(rng)), s2 = footfall({ux(rng), uy(rng)}, t0(rng), amp(rng));
    const std::vector<floorsim::Footfall> both{s1, s2}, one{s1}, two{s2};
    const auto j = floorsim::geophone_transduce(floorsim::simulate_vibration(both, floor, 0.0, 900, 0));
    const auto a = floorsim::geophone_transduce(floorsim::simulate_vibration(one, floor, 0.0, 900, 0));
    const auto b = floorsim::geophone_transduce(floorsim::simulate_vibration(two, floor, 0.0, 900, 0));
    for (std::size_t s = 0; s < j.sensors(); ++s)
      for (std::size_t i = 0; i < j.samples(); ++i)
        superposition = std::max(superposition, std::abs(j.signals[s][i] - a.signals[s][i] - b.signals[s][i]));
    for (double c : {2.0, 3.7, 0.25}) {
      std::vector<floorsim::Footfall> scaled = one;
      for (double& x : scaled[0].force) x *= c;
      const auto sc = floorsim::geophone_transduce(floorsim::simulate_vibration(scaled, floor, 0.0, 900, 0));
      scaling = std::max(scaling, max_abs_diff(sc, a, c));
    }
  }
  floorsim::FloorModel plain;
  plain.noise_std = 0.0;
  std::size_t pairs = 0, violations = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const floorsim::Point p{ux(rng), uy(rng)};
    const std::vector<floorsim::Footfall> steps{footfall(p, 0.0, amp(rng))};
    const auto vel = floorsim::simulate_vibration(steps, plain, 0.0, 700, 0);
    std::vector<double> peak(vel.velocity.size(), 0.0);
    for (std::size_t s = 0; s < peak.size(); ++s)
      for (double x : vel.velocity[s]) peak[s] = std::max(peak[s], std::abs(x));
    for (std::size_t a = 0; a < peak.size(); ++a)
      for (std::size_t b = 0; b < peak.size(); ++b) {
        const double da = floorsim::distance(plain.sensor_positions[a], p);
        const double db = floorsim::distance(plain.sensor_positions[b], p);
        if (da < db) {
          ++pairs;
          violations += !(peak[a] > peak[b]);
        }
      }
  }
  v.note("superposition max error " + fmt("%.3e", superposition) + " V, scaling max error " + fmt("%.3e", scaling) +
         " V (limit 1e-10)");
  v.note("attenuation: " + std::to_string(violations) + " violations in " + std::to_string(pairs) +
         " ordered sensor pairs over 100 random footfalls");
  v.pass = superposition < 1e-10 && scaling < 1e-10 && violations == 0 && pairs > 0;
  return v;
}

const std::vector<pig::GraphInstance>& small_dataset() {
  static const auto graphs = testing::synthetic_graphs(2, 2);
  return graphs;
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

// 4. Finite differences on small graphs and the dead-parameter audit.
Verdict gradient_suite() {
  Verdict v;
  pig::PigConfig cfg;
  cfg.hidden_dim = 4;
  cfg.lstm_hidden = 4;
  cfg.message_rounds = 2;
  cfg.vib_window = 24;
  cfg.frame_length = 8;
  std::mt19937_64 rng(2025);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const auto& real = small_dataset()[static_cast<std::size_t>(k) % small_dataset().size()];
    const auto g = testing::small_graph(real, cfg.vib_window, rng);
    cfg.seed = 500 + static_cast<std::uint64_t>(k);
    const pig::Model m = pig::init_model(pig::ModelKind::Pig, cfg);
    std::vector<double> analytic(m.params.size(), 0.0);
    pig::loss_and_grad(m, g, analytic);
    const auto fd = testing::central_differences(
        [&](const num::ParamStore& p) {
          pig::Model q = m;
          q.params = p;
          return pig::loss_value(q, g);
        },
        m.params);
    worst = std::max(worst, testing::max_relative_error(analytic, fd));
  }
  v.note("PIG loss gradient: max relative error " + fmt("%.3e", worst) + " on 20 small graphs (limit 1e-4)");

  const auto& graphs = small_dataset();
  std::vector<std::string> dead;
  for (auto kind : {pig::ModelKind::Pig, pig::ModelKind::Lstm}) {
    const pig::Model m = pig::init_model(kind, pig::PigConfig{}, pig::fit_normalizer(graphs, all_indices(graphs.size())));
    std::vector<double> any(m.params.size(), 0.0);
    for (std::size_t i = 0; i < 4; ++i) {
      std::vector<double> g(m.params.size(), 0.0);
      pig::loss_and_grad(m, graphs[i], g);
      for (std::size_t k = 0; k < g.size(); ++k) any[k] = std::max(any[k], std::abs(g[k]));
    }
    for (const auto& name : m.params.names_by_offset()) {
      const auto& s = m.params.slice(name);
      bool alive = false;
      for (std::size_t k = s.offset; k < s.offset + s.shape.size(); ++k) alive = alive || any[k] > 0.0;
      if (!alive) dead.push_back(name);
    }
  }
  std::string list;
  for (const auto& d : dead) list += " " + d;
  v.note("dead-parameter audit: " + std::to_string(dead.size()) + " slices without gradient" + list);
  v.pass = worst < 1e-4 && dead.empty();
  return v;
}

// 5. One sample, 200 epochs, both models.
Verdict overfit_sanity() {
  Verdict v;
  const auto& graphs = small_dataset();
  const std::vector<std::size_t> one{0};
  v.pass = true;
  for (auto kind : {pig::ModelKind::Pig, pig::ModelKind::Lstm}) {
    pig::PigConfig cfg;
    cfg.epochs = 200;
    cfg.batch_size = 1;
    cfg.patience = 200;
    cfg.learning_rate = 1e-2;
    const auto r = pig::train(kind, cfg, graphs, one, {});
    const double mse = pig::pig_loss(pig::predict(r.model, graphs[0]), graphs[0].targets, 0.0, 0.0);
    v.note(std::string(pig::to_string(kind)) + " training MSE " + fmt("%.3e", mse) + " deg^2 (limit 0.01)");
    v.pass = v.pass && mse < 0.01;
  }
  return v;
}

struct SeedRun {
  std::uint64_t seed = 0;
  pig::Report pig, lstm;
};

std::vector<SeedRun>& seed_runs() {
  static std::vector<SeedRun> runs;
  return runs;
}

double abnormal_mae(const pig::Report& r) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& row : r.rows)
    if (row.group == "gait_type" && row.key != "normal") {
      sum += row.mae * static_cast<double>(row.cycles);
      n += row.cycles;
    }
  return n ? sum / static_cast<double>(n) : 0.0;
}

// 6. Full synthetic benchmark over three seeds.
Verdict relative_performance() {
  Verdict v;
  const std::vector<std::uint64_t> seeds{2024, 2025, 2026};
  const auto start = Clock::now();
  double reduction_sum = 0.0;
  bool every_seed = true;
  for (auto seed : seeds) {
    app::RunConfig c;
    c.seed = seed;
    c.tuning.enabled = true;
    const auto graphs = app::synthesize_graphs(c, c.pig.vib_window);
    const auto split = pig::make_split(graphs, pig::Protocol::PerTrial, seed);
    SeedRun run{seed, {}, {}};
    for (auto kind : {pig::ModelKind::Pig, pig::ModelKind::Lstm}) {
      const auto t0 = Clock::now();
      const auto out = app::train_model(c, kind, graphs, split, nullptr);
      const auto& cfg = out.result.model.cfg;
      auto report = pig::evaluate(out.result.model, graphs, split.test);
      v.note("seed " + std::to_string(seed) + " " + std::string(pig::to_string(kind)) + ": test MAE " +
             fmt("%.3f", report.at("overall", "all").mae) + " deg, tuned hidden " +
             std::to_string(kind == pig::ModelKind::Pig ? cfg.hidden_dim : cfg.lstm_hidden) + " lr " +
             fmt("%g", cfg.learning_rate) + ", best epoch " + std::to_string(out.result.best_epoch) + " of " +
             std::to_string(out.result.history.size()) + ", " + fmt("%.0f", seconds_since(t0)) + " s");
      std::fprintf(stderr, "%s\n", v.details.back().c_str());
      (kind == pig::ModelKind::Pig ? run.pig : run.lstm) = std::move(report);
    }
    const double p = run.pig.at("overall", "all").mae, l = run.lstm.at("overall", "all").mae;
    reduction_sum += (l - p) / l;
    every_seed = every_seed && p < l;
    v.note("seed " + std::to_string(seed) + ": reduction " + fmt("%.1f", 100.0 * (l - p) / l) + "%");
    seed_runs().push_back(std::move(run));
  }
  const double mean_reduction = reduction_sum / static_cast<double>(seeds.size());
  const double elapsed = seconds_since(start);
  v.note("mean reduction " + fmt("%.1f", 100.0 * mean_reduction) + "% (limit 15%), PIG better on every seed: " +
         (every_seed ? "yes" : "no"));
  v.note("wall time " + fmt("%.1f", elapsed / 60.0) + " min with " + std::to_string(worker_count()) +
         " worker(s) (limit 45 min)");
  v.pass = every_seed && mean_reduction >= 0.15 && elapsed < 45.0 * 60.0;
  return v;
}

// 7. Normal against abnormal gait, from the runs of criterion 6.
Verdict gait_pattern() {
  Verdict v;
  if (seed_runs().empty()) relative_performance();
  v.pass = true;
  for (const auto& run : seed_runs()) {
    for (const auto* rep : {&run.pig, &run.lstm}) {
      const bool is_pig = rep == &run.pig;
      const double normal = rep->at("gait_type", "normal").mae, abnormal = abnormal_mae(*rep);
      v.note("seed " + std::to_string(run.seed) + (is_pig ? " pig" : " lstm") + ": normal " + fmt("%.3f", normal) +
             " deg, abnormal " + fmt("%.3f", abnormal) + " deg, stance " +
             fmt("%.3f", rep->at("phase", "stance").mae) + " deg, swing " +
             fmt("%.3f", rep->at("phase", "swing").mae) + " deg");
      v.pass = v.pass && normal < abnormal;
    }
  }
  return v;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// 8. Byte-identical artifacts from identical config and seed.
Verdict reproducibility() {
  Verdict v;
  const fs::path root = fs::temp_directory_path() / ("gaitvib_acceptance_" + std::to_string(std::random_device{}()));
  fs::create_directories(root);
  std::ostringstream log;
  std::vector<std::string> mismatched;
  std::size_t compared = 0;
  auto compare = [&](const fs::path& a, const fs::path& b) {
    ++compared;
    const std::string x = slurp(a), y = slurp(b);
    if (x.empty() || x != y) mismatched.push_back(a.filename().string());
  };

  // Default 1000-trial manifest, twice.
  app::CommandOptions full;
  full.out = root / "full_a";
  app::cmd_simulate(full, log);
  full.out = root / "full_b";
  app::cmd_simulate(full, log);
  compare(root / "full_a" / app::kManifestName, root / "full_b" / app::kManifestName);

  // A small run end to end, twice, with distinct output directories.
  const fs::path cfg = root / "small.json";
  std::ofstream(cfg) << R"({"dataset": {"dir": ")" << (root / "data").generic_string()
                     << R"(", "subjects": 3, "normal_trials": 3, "abnormal_trials": 2},)"
                     << R"("pig": {"epochs": 4}, "lstm": {"epochs": 4}})";
  app::CommandOptions o;
  o.config = cfg;
  app::cmd_simulate(o, log);
  for (const char* run : {"run_a", "run_b"}) {
    o.out = root / run;
    for (auto kind : {pig::ModelKind::Pig, pig::ModelKind::Lstm}) {
      o.model = kind;
      app::cmd_train(o, log);
    }
    o.model.reset();
    app::cmd_eval(o, log);
  }
  for (const char* name : {"pig_checkpoint.txt", "lstm_checkpoint.txt", "pig_history.csv", "lstm_history.csv",
                           "pig_split.csv", "lstm_split.csv", "report_pig_test.csv", "report_lstm_test.csv",
                           "segments_test.svg"})
    compare(root / "run_a" / name, root / "run_b" / name);

  std::error_code ec;
  fs::remove_all(root, ec);
  v.note(std::to_string(compared - mismatched.size()) + " of " + std::to_string(compared) +
         " artifacts byte-identical (1000-trial manifest, checkpoints, histories, splits, reports, chart)");
  for (const auto& m : mismatched) v.note("differs: " + m);
  v.pass = mismatched.empty();
  return v;
}

struct Criterion {
  int id;
  const char* name;
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "integrator oracle", integrator_oracle},
      {2, "biomechanics oracle", biomechanics_oracle},
      {3, "LTI property suite", lti_suite},
      {4, "gradient suite", gradient_suite},
      {5, "overfit sanity", overfit_sanity},
      {6, "relative performance", relative_performance},
      {7, "normal vs abnormal gait pattern", gait_pattern},
      {8, "reproducibility", reproducibility},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  int failures = 0;
  for (const auto& c : criteria) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto t0 = Clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v.pass = false;
      v.note(std::string("threw: ") + e.what());
    }
    std::printf("%s criterion %d (%s) [%.1f s]\n", v.pass ? "PASS" : "FAIL", c.id, c.name, seconds_since(t0));
    for (const auto& d : v.details) std::printf("    %s\n", d.c_str());
    std::fflush(stdout);
    failures += !v.pass;
  }
  std::printf("%d criteria failed\n", failures);
  return failures;
}
