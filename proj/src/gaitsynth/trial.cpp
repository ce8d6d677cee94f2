#include "gaitvib/gaitsynth/trial.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "gaitvib/core/numfmt.hpp"
#include "gaitvib/core/rng.hpp"

namespace gaitvib::gaitsynth {

Subject make_subject(std::uint64_t id, std::uint64_t dataset_seed) {
  std::mt19937_64 rng(derive_seed(dataset_seed, {0x50, id}));
  std::normal_distribution<double> z(0.0, 1.0);
  auto draw = [&](double mean, double sd, double lo, double hi) {
    return std::clamp(mean + sd * z(rng), lo, hi);
  };
  Subject s;
  s.id = id;
  biomech::Anthropometry& a = s.anthropometry;
  a.height = draw(1.72, 0.08, 1.50, 1.95);
  const double bmi = draw(23.5, 2.5, 18.0, 31.0);
  a.body_mass = bmi * a.height * a.height;
  a.thigh_length = 0.245 * a.height * draw(1.0, 0.03, 0.92, 1.08);
  a.shank_length = 0.246 * a.height * draw(1.0, 0.03, 0.92, 1.08);
  a.foot_length = 0.152 * a.height * draw(1.0, 0.03, 0.92, 1.08);
  s.cadence_factor = draw(1.0, 0.04, 0.9, 1.1);
  s.seed = derive_seed(dataset_seed, {0x51, id});
  return s;
}

namespace {

struct StanceRun {
  std::size_t begin;
  std::size_t end;  // inclusive
  Foot foot;
};

std::vector<StanceRun> stance_runs(const std::vector<bool>& mask, Foot foot) {
  std::vector<StanceRun> runs;
  for (std::size_t i = 0; i < mask.size();) {
    if (!mask[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < mask.size() && mask[j + 1]) ++j;
    runs.push_back({i, j, foot});
    i = j + 1;
  }
  return runs;
}

// Sub-span [begin, begin + n) of every series.
biomech::JointTrajectory crop(const biomech::JointTrajectory& t, std::size_t begin, std::size_t n) {
  biomech::JointTrajectory c;
  c.sample_rate = t.sample_rate;
  c.start_time = 0.0;
  auto sub = [&](const std::vector<double>& v) {
    return std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(begin),
                               v.begin() + static_cast<std::ptrdiff_t>(begin + n));
  };
  c.hip = sub(t.hip);
  c.knee = sub(t.knee);
  c.ankle = sub(t.ankle);
  return c;
}

biomech::GrfSeries crop(const biomech::GrfSeries& g, std::size_t begin, std::size_t n) {
  biomech::GrfSeries c;
  c.sample_rate = g.sample_rate;
  c.start_time = 0.0;
  const auto b = static_cast<std::ptrdiff_t>(begin), e = static_cast<std::ptrdiff_t>(begin + n);
  c.vertical.assign(g.vertical.begin() + b, g.vertical.begin() + e);
  c.anterior_posterior.assign(g.anterior_posterior.begin() + b, g.anterior_posterior.begin() + e);
  c.stance_mask.assign(g.stance_mask.begin() + b, g.stance_mask.begin() + e);
  return c;
}

void quantize_all(std::vector<double>& v) {
  for (double& x : v) x = quantize(x);
}

void quantize_record(TrialRecord& r) {
  auto& a = r.anthropometry;
  for (double* x : {&a.body_mass, &a.thigh_length, &a.shank_length, &a.foot_length, &a.height, &r.cadence})
    *x = quantize(*x);
  for (auto* t : {&r.left, &r.right}) {
    quantize_all(t->hip);
    quantize_all(t->knee);
    quantize_all(t->ankle);
  }
  for (auto* e : {&r.events.left, &r.events.right}) {
    quantize_all(e->foot_strike_times);
    quantize_all(e->foot_off_times);
  }
  for (auto* g : {&r.grf.left, &r.grf.right}) {
    quantize_all(g->vertical);
    quantize_all(g->anterior_posterior);
  }
  for (auto& s : r.vibration.signals) quantize_all(s);
}

}  // namespace

std::vector<floorsim::Footfall> footfalls_from_grf(const biomech::BilateralGrf& grf,
                                                   const floorsim::FloorModel& floor,
                                                   double step_length, double foot_spacing,
                                                   double record_begin, double record_end) {
  auto runs = stance_runs(grf.left.stance_mask, Foot::Left);
  const auto right = stance_runs(grf.right.stance_mask, Foot::Right);
  runs.insert(runs.end(), right.begin(), right.end());
  std::stable_sort(runs.begin(), runs.end(),
                   [](const StanceRun& a, const StanceRun& b) { return a.begin < b.begin; });
  if (runs.empty()) return {};

  const biomech::GrfSeries& ref = grf.left;
  auto time = [&](std::size_t i) { return ref.start_time + static_cast<double>(i) / ref.sample_rate; };
  double rank_sum = 0.0;
  int in_record = 0;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    if (time(runs[r].end) >= record_begin && time(runs[r].begin) <= record_end) {
      rank_sum += static_cast<double>(r);
      ++in_record;
    }
  }
  const double centre_rank = in_record > 0 ? rank_sum / in_record : 0.5 * static_cast<double>(runs.size() - 1);

  const floorsim::Point lo = floor.min_corner(), hi = floor.max_corner();
  const double xc = 0.5 * (lo.x + hi.x), yc = 0.5 * (lo.y + hi.y);
  std::vector<floorsim::Footfall> out;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const StanceRun& run = runs[r];
    const biomech::GrfSeries& g = run.foot == Foot::Left ? grf.left : grf.right;
    // One zero sample either side (when present) so resampling ramps to zero.
    const std::size_t b = run.begin > 0 ? run.begin - 1 : 0;
    const std::size_t e = std::min(run.end + 1, g.size() - 1);
    floorsim::Footfall f;
    f.sample_rate = g.sample_rate;
    f.start_time = time(b);
    f.force.assign(g.vertical.begin() + static_cast<std::ptrdiff_t>(b),
                   g.vertical.begin() + static_cast<std::ptrdiff_t>(e + 1));
    const double side = run.foot == Foot::Left ? 1.0 : -1.0;
    f.position.x = std::clamp(xc + (static_cast<double>(r) - centre_rank) * step_length, lo.x, hi.x);
    f.position.y = std::clamp(yc + side * foot_spacing, lo.y, hi.y);
    out.push_back(std::move(f));
  }
  return out;
}

TrialRecord synth_trial(GaitType type, const Subject& subject, std::uint64_t trial_id,
                        std::uint64_t trial_seed, const floorsim::FloorModel& floor,
                        const TrialOptions& opts) {
  subject.anthropometry.validate();
  floor.validate();
  std::mt19937_64 rng(derive_seed(trial_seed, {0xc4}));
  std::normal_distribution<double> z(0.0, 1.0);
  const double cadence = std::clamp(gait_template(type).cadence * subject.cadence_factor *
                                        (1.0 + opts.cadence_jitter * std::clamp(z(rng), -2.5, 2.5)),
                                    60.0, 160.0);

  const SynthesizedGait gait = synth_trajectory(type, subject.seed, trial_seed, opts.n_cycles, cadence,
                                                opts.variability, opts.mocap_rate, opts.padding);
  const biomech::BilateralGrf padded_grf = biomech::inverse_dynamics(
      gait.left, gait.right, subject.anthropometry, gait.stance_left, gait.stance_right, opts.dynamics);

  const double fs = opts.mocap_rate;
  const auto pad = static_cast<std::size_t>(std::llround(opts.padding * fs));
  const std::size_t n = gait.left.size() - 2 * pad;
  const double record_end = static_cast<double>(n - 1) / fs;

  // Fade the force in over the first half of the padding.
  biomech::BilateralGrf faded = padded_grf;
  const double fade = 0.5 * opts.padding;
  for (auto* g : {&faded.left, &faded.right}) {
    for (std::size_t i = 0; i < g->size(); ++i) {
      const double t = static_cast<double>(i) / fs;
      if (fade > 0.0 && t < fade) g->vertical[i] *= 0.5 - 0.5 * std::cos(std::numbers::pi * t / fade);
    }
  }
  const auto footfalls = footfalls_from_grf(faded, floor, opts.step_length_ratio * subject.anthropometry.height,
                                            opts.foot_spacing, 0.0, record_end);

  const double vfs = floor.sample_rate;
  const auto vib_pad = static_cast<std::size_t>(std::llround(opts.padding * vfs));
  const auto vib_n = static_cast<std::size_t>(std::llround(record_end * vfs)) + 1;
  const auto velocity = floorsim::simulate_vibration(footfalls, floor, -static_cast<double>(vib_pad) / vfs,
                                                     vib_pad + vib_n, derive_seed(trial_seed, {0xf1}));
  const floorsim::VibrationRecord full = floorsim::geophone_transduce(velocity, opts.geophone);

  TrialRecord r;
  r.trial_id = trial_id;
  r.subject_id = subject.id;
  r.gait_type = type;
  r.anthropometry = subject.anthropometry;
  r.seed = trial_seed;
  r.cadence = cadence;
  r.left = crop(gait.left, pad, n);
  r.right = crop(gait.right, pad, n);
  r.events = gait.events;
  r.grf.left = crop(padded_grf.left, pad, n);
  r.grf.right = crop(padded_grf.right, pad, n);
  r.vibration = full;
  r.vibration.start_time = 0.0;
  for (auto& s : r.vibration.signals)
    s.erase(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(vib_pad));
  quantize_record(r);
  return r;
}

}  // namespace gaitvib::gaitsynth
