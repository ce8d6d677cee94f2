#include "gaitvib/gaitsynth/trajectory.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "gaitvib/core/rng.hpp"

namespace gaitvib::gaitsynth {

std::string_view to_string(Foot f) noexcept { return f == Foot::Left ? "L" : "R"; }

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct JointDraw {
  double offset = 0.0;
  double scale = 1.0;
  FourierCurve perturbation;
};

double frac(double x) { return x - std::floor(x); }

// Standard normal truncated at +-2.5 so extreme draws cannot push angles out of range.
struct TruncatedNormal {
  std::normal_distribution<double> dist{0.0, 1.0};
  double operator()(std::mt19937_64& rng) {
    for (;;) {
      const double z = dist(rng);
      if (std::abs(z) <= 2.5) return z;
    }
  }
};

// Identity inside [-35, 145]; beyond, tanh saturation keeps angles strictly
// inside the physiological range while staying smooth.
double soft_limit(double x) {
  constexpr double lo = biomech::kMinJointAngle + 5.0, hi = biomech::kMaxJointAngle - 5.0;
  if (x < lo) return lo - 5.0 * std::tanh((lo - x) / 5.0);
  if (x > hi) return hi + 5.0 * std::tanh((x - hi) / 5.0);
  return x;
}

}  // namespace

SynthesizedGait synth_trajectory(GaitType type, std::uint64_t subject_seed,
                                 std::uint64_t trial_seed, int n_cycles, double cadence,
                                 const GaitVariability& var, double sample_rate, double padding) {
  if (n_cycles < 1) throw std::invalid_argument("n_cycles must be at least 1");
  if (!(cadence >= 60.0 && cadence <= 160.0))
    throw std::invalid_argument("cadence must lie in [60, 160] steps/min");
  if (!(sample_rate > 0.0)) throw std::invalid_argument("sample rate must be positive");
  if (!(padding >= 0.0)) throw std::invalid_argument("padding must be non-negative");

  const GaitTemplate& tpl = gait_template(type);
  const double factor = is_abnormal(type) ? var.abnormal_factor : 1.0;

  std::mt19937_64 subj_rng(derive_seed(subject_seed, {0x5b}));
  std::mt19937_64 trial_rng(derive_seed(trial_seed, {0x7a, static_cast<std::uint64_t>(type)}));
  TruncatedNormal normal;

  std::array<double, 3> subj_offset{};
  std::array<double, 3> subj_scale{};
  for (std::size_t j = 0; j < 3; ++j) {
    subj_offset[j] = var.subject_offset * normal(subj_rng);
    subj_scale[j] = 1.0 + var.subject_scale * normal(subj_rng);
  }

  const double sf = std::clamp(tpl.stance_fraction + factor * var.stance_jitter * normal(trial_rng),
                               kMinStanceFraction, kMaxStanceFraction);
  // Warp phi -> phi + A sin(2 pi phi) maps the trial's foot off onto the template's.
  const double warp = (tpl.stance_fraction - sf) / std::sin(kTwoPi * sf);

  std::array<std::array<JointDraw, 3>, 2> draws;  // [leg][joint], leg 0 = left
  for (auto& leg : draws) {
    for (std::size_t j = 0; j < 3; ++j) {
      JointDraw& d = leg[j];
      d.offset = subj_offset[j];
      d.scale = subj_scale[j];
      d.perturbation.a0 = factor * var.trial_offset * normal(trial_rng);
      for (std::size_t k = 0; k < 4; ++k) {
        const double s = factor * var.trial_harmonic / static_cast<double>(k + 1);
        d.perturbation.a[k] = s * normal(trial_rng);
        d.perturbation.b[k] = s * normal(trial_rng);
      }
    }
  }

  const double period = 120.0 / cadence;
  const double span = n_cycles * period;
  const auto pad = static_cast<std::size_t>(std::llround(padding * sample_rate));
  const auto n = static_cast<std::size_t>(std::ceil(span * sample_rate - 1e-9)) + 1 + 2 * pad;

  SynthesizedGait out;
  out.cycle_duration = period;
  out.stance_fraction = sf;
  for (auto* traj : {&out.left, &out.right}) {
    traj->sample_rate = sample_rate;
    traj->start_time = -static_cast<double>(pad) / sample_rate;
    traj->hip.resize(n);
    traj->knee.resize(n);
    traj->ankle.resize(n);
  }
  out.stance_left.resize(n);
  out.stance_right.resize(n);

  auto angle = [&](const JointDraw& d, const FourierCurve& c, double theta) {
    return soft_limit(c.a0 + d.offset + d.scale * (c(theta) - c.a0) + d.perturbation(theta));
  };

  for (std::size_t i = 0; i < n; ++i) {
    const double t = (static_cast<double>(i) - static_cast<double>(pad)) / sample_rate;
    for (int leg = 0; leg < 2; ++leg) {
      const double phi = frac(t / period + (leg == 0 ? 0.5 : 0.0));
      const double theta = phi + warp * std::sin(kTwoPi * phi);
      biomech::JointTrajectory& tr = leg == 0 ? out.left : out.right;
      tr.hip[i] = angle(draws[leg][0], tpl.hip, theta);
      tr.knee[i] = angle(draws[leg][1], tpl.knee, theta);
      tr.ankle[i] = angle(draws[leg][2], tpl.ankle, theta);
      (leg == 0 ? out.stance_left : out.stance_right)[i] = phi < sf;
    }
  }

  for (int k = 0; k <= n_cycles; ++k) {
    out.events.right.foot_strike_times.push_back(k * period);
    if (k < n_cycles) out.events.right.foot_off_times.push_back((k + sf) * period);
  }
  for (int k = 0; k < n_cycles; ++k) {
    out.events.left.foot_strike_times.push_back((k + 0.5) * period);
    const double off = (k + 0.5 + sf) * period;
    if (off <= span) out.events.left.foot_off_times.push_back(off);
  }
  return out;
}

}  // namespace gaitvib::gaitsynth
