#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "gaitvib/biomech/inverse_dynamics.hpp"
#include "gaitvib/gaitsynth/templates.hpp"

namespace gaitvib::gaitsynth {

enum class Foot { Left, Right };
std::string_view to_string(Foot f) noexcept;

/// Event times of one foot, seconds. Strikes and offs alternate, starting
/// with a strike; an off may trail the last strike.
struct GaitEvents {
  std::vector<double> foot_strike_times;
  std::vector<double> foot_off_times;

  bool operator==(const GaitEvents&) const = default;
};

struct BilateralEvents {
  GaitEvents left;
  GaitEvents right;

  const GaitEvents& foot(Foot f) const noexcept { return f == Foot::Left ? left : right; }
  GaitEvents& foot(Foot f) noexcept { return f == Foot::Left ? left : right; }

  bool operator==(const BilateralEvents&) const = default;
};

/// Standard deviations of the random departures from a template. Angles in
/// degrees. Abnormal gait types multiply every trial-level term by
/// abnormal_factor.
struct GaitVariability {
  double subject_offset = 3.0;   // per joint, fixed for a subject
  double subject_scale = 0.08;   // relative amplitude about the template mean
  double trial_offset = 1.0;     // per leg and joint
  double trial_harmonic = 1.2;   // harmonic k drawn with trial_harmonic / k
  double stance_jitter = 0.01;   // stance fraction
  double abnormal_factor = 2.5;

  static GaitVariability none() noexcept { return {0, 0, 0, 0, 0, 1}; }
};

struct SynthesizedGait {
  biomech::JointTrajectory left;
  biomech::JointTrajectory right;
  BilateralEvents events;
  std::vector<bool> stance_left;
  std::vector<bool> stance_right;
  double cycle_duration = 0.0;   // s
  double stance_fraction = 0.0;  // foot-off phase of both legs
};

inline constexpr double kMinStanceFraction = 0.56;
inline constexpr double kMaxStanceFraction = 0.69;

/// Walking trial of n_cycles gait cycles of the right foot, which strikes at
/// t = 0; the left leg runs half a cycle behind. The sampled span covers the
/// last right strike. Cycle period is 120 / cadence seconds (two steps).
///
/// Each leg's trial phase is warped smoothly onto the template phase so that
/// the trial's foot off lands on the template's. Throws std::invalid_argument
/// when n_cycles < 1 or cadence is outside [60, 160] steps/min.
///
/// `padding` extends the sampled span by that many seconds (rounded to whole
/// samples) on both sides without adding events; the walk simply continues.
SynthesizedGait synth_trajectory(GaitType type, std::uint64_t subject_seed,
                                 std::uint64_t trial_seed, int n_cycles, double cadence,
                                 const GaitVariability& var = {}, double sample_rate = 100.0,
                                 double padding = 0.0);

}  // namespace gaitvib::gaitsynth
