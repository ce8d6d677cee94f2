#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "gaitvib/biomech/inverse_dynamics.hpp"
#include "gaitvib/gaitsynth/templates.hpp"
#include "gaitvib/gaitsynth/trajectory.hpp"

namespace gaitvib::gaitsynth {

struct GaitCycle {
  double start = 0.0;     // foot strike, s
  double end = 0.0;       // next strike of the same foot, s
  double foot_off = 0.0;  // s
  std::uint64_t trial_id = 0;
  Foot foot = Foot::Right;

  double duration() const noexcept { return end - start; }
};

/// One cycle per consecutive strike pair, each containing exactly one off.
/// Throws DataError naming the foot and strike index when an off is missing,
/// duplicated or precedes the first strike.
std::vector<GaitCycle> extract_cycles(const GaitEvents& events, Foot foot,
                                      std::uint64_t trial_id = 0);
/// Cycles of both feet, left first.
std::vector<GaitCycle> extract_cycles(const BilateralEvents& events, std::uint64_t trial_id = 0);

enum class GaitEvent { FootStrike, LoadingResponse, FootOff, MidSwing };
inline constexpr std::array<GaitEvent, 4> kGaitEvents{GaitEvent::FootStrike, GaitEvent::LoadingResponse,
                                                      GaitEvent::FootOff, GaitEvent::MidSwing};
std::string_view to_string(GaitEvent e) noexcept;
inline constexpr bool is_stance_event(GaitEvent e) noexcept { return e != GaitEvent::MidSwing; }

inline constexpr std::size_t kTargetCount = 12;
/// Slot of (joint, event) in the 12-vector: joint-major.
constexpr std::size_t target_index(Joint j, GaitEvent e) noexcept {
  return static_cast<std::size_t>(j) * 4 + static_cast<std::size_t>(e);
}

/// Critical angles of one cycle, degrees, indexed by target_index.
struct TargetAngles {
  std::array<double, kTargetCount> values{};

  double operator[](std::size_t i) const noexcept { return values[i]; }
  double& operator[](std::size_t i) noexcept { return values[i]; }
  double at(Joint j, GaitEvent e) const noexcept { return values[target_index(j, e)]; }
};

/// Window fractions used by extract_targets.
inline constexpr double kLoadingWindow = 0.20;  // leading fraction of stance
inline constexpr double kMidSwingBegin = 1.0 / 3.0;
inline constexpr double kMidSwingEnd = 2.0 / 3.0;

/// Whether the extremum sought at (joint, event) is a maximum. Knee: flexion
/// peaks at loading and in swing; hip: flexion peaks; ankle: plantarflexion
/// at loading, dorsiflexion in swing.
bool seeks_maximum(Joint j, GaitEvent e) noexcept;

/// Samples each joint at strike and off by cubic interpolation; loading
/// response and mid-swing are the extremum of the interpolant within their
/// windows, refined by a parabola through the peak sample. Throws DataError
/// if the cycle lies outside the trajectory span.
TargetAngles extract_targets(const biomech::JointTrajectory& traj, const GaitCycle& cycle);

/// Cubic (four-point Lagrange) interpolation of a uniformly sampled series.
double interpolate_cubic(const std::vector<double>& x, double sample_rate, double start_time, double t);

}  // namespace gaitvib::gaitsynth
