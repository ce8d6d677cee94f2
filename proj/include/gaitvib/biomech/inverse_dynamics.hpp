#pragma once

#include <cstddef>
#include <vector>

#include "gaitvib/biomech/anthropometry.hpp"

namespace gaitvib::biomech {

inline constexpr double kMinJointAngle = -40.0;  // deg
inline constexpr double kMaxJointAngle = 150.0;  // deg

/// Sagittal joint angles of one leg, degrees. Hip flexion is thigh rotation
/// forward of vertical, knee flexion is shank rotation backward relative to
/// the thigh, ankle angle is dorsiflexion (negative = plantarflexion).
struct JointTrajectory {
  std::vector<double> hip;
  std::vector<double> knee;
  std::vector<double> ankle;
  double sample_rate = 100.0;  // Hz
  double start_time = 0.0;     // s, time of sample 0

  std::size_t size() const noexcept { return hip.size(); }
  double time(std::size_t i) const { return start_time + static_cast<double>(i) / sample_rate; }
  /// Throws std::invalid_argument on unequal lengths, bad sample rate or
  /// angles outside [-40, 150] degrees.
  void validate() const;

  bool operator==(const JointTrajectory&) const = default;
};

/// Ground reaction force under one foot, N. Both components are exactly zero
/// wherever stance_mask is false.
struct GrfSeries {
  std::vector<double> vertical;
  std::vector<double> anterior_posterior;
  std::vector<bool> stance_mask;
  double sample_rate = 100.0;
  double start_time = 0.0;

  std::size_t size() const noexcept { return vertical.size(); }

  bool operator==(const GrfSeries&) const = default;
};

struct BilateralGrf {
  GrfSeries left;
  GrfSeries right;

  /// Elementwise sum of both feet; stance where either foot is in stance.
  GrfSeries total() const;

  bool operator==(const BilateralGrf&) const = default;
};

/// Sagittal foot geometry used only to place the ankle above the floor
/// (the foot carries no inertia). The foot rolls over the heel when the sole
/// is pitched toe-up and over the forefoot when pitched toe-down.
struct FootGeometry {
  double ankle_height_ratio = 0.039;  // of standing height
  double heel_ratio = 0.20;           // heel pivot behind the ankle, of foot length
  double toe_ratio = 0.65;            // forefoot pivot ahead of the ankle, of foot length
  double rocker_smoothing = 0.05;     // rad, width of the heel/forefoot hand-over
};

/// Heel-strike transient: the collision of the touching-down foot adds an
/// impulse m_eff * v (m_eff = mass_ratio * body mass) to that foot as a
/// half-sine pulse, and the same impulse is taken back from the body's net
/// force over `recovery` seconds, so the transient carries no net momentum.
struct HeelStrike {
  double mass_ratio = 0.05;
  double velocity = 0.5;   // m/s, touchdown speed
  double duration = 0.02;  // s
  double recovery = 0.15;  // s
};

struct InverseDynamicsOptions {
  RatioTable ratios;
  FootGeometry foot;
  double pelvic_tilt = 10.0;  // deg, anterior; hip flexion is measured from the pelvis
  HeelStrike heel_strike;
  double pelvis_smoothing = 0.08;  // s, Gaussian kernel width on pelvis height; 0 disables
  double gravity = kGravity;
};

/// Height of the hip joint above the floor when the leg supports the body:
/// thigh and shank projections plus the ankle height on the foot rocker.
double support_chain_height(double hip, double knee, double ankle, const Anthropometry& a,
                            const InverseDynamicsOptions& opts = {});

/// Link-segment inverse dynamics for two legs and a trunk carried at the hips.
///
/// Segment positions come from forward kinematics of each leg's angle chain
/// hung from the hip joint (thigh angle = hip flexion minus pelvic tilt).
/// Pelvis height is the load-share weighted mean of the two legs' support
/// chains, low-passed by a Gaussian kernel: synthetic angle curves are not a
/// closed kinematic loop in double support, and the raw chain mismatch would
/// otherwise dominate the vertical force. Horizontal pelvis speed is constant. Accelerations use central
/// second differences with four-point one-sided stencils at the ends.
///
/// Forces are propagated proximal to distal through each stance leg: the hip
/// carries its share of the trunk and contralateral load, the knee adds the
/// thigh's Newton term, the ankle the shank's, and the floor reaction adds the
/// (massless) foot's weight. Double support is statically indeterminate; the
/// body's net force is split between feet with a smooth load-transfer weight
/// from the trailing to the leading foot.
///
/// Throws std::invalid_argument for fewer than 3 samples, mismatched lengths
/// or invalid inputs.
BilateralGrf inverse_dynamics(const JointTrajectory& left, const JointTrajectory& right,
                              const Anthropometry& a, const std::vector<bool>& stance_left,
                              const std::vector<bool>& stance_right,
                              const InverseDynamicsOptions& opts = {});

/// Symmetric-body form: both legs follow `traj` with the same stance mask.
/// Returns the summed floor reaction of both feet.
GrfSeries inverse_dynamics(const JointTrajectory& traj, const Anthropometry& a,
                           const std::vector<bool>& stance_mask,
                           const InverseDynamicsOptions& opts = {});

/// Load-transfer weights (left, right) per sample. Single support gives 1/0,
/// flight 0/0, and a double-support run ramps the incoming foot from 0 to 1
/// with a raised-cosine profile. A run spanning the whole series is 0.5/0.5.
struct LoadShare {
  std::vector<double> left;
  std::vector<double> right;
};
LoadShare load_share(const std::vector<bool>& stance_left, const std::vector<bool>& stance_right);

/// Second derivative by central differences, one-sided at the ends.
std::vector<double> second_derivative(const std::vector<double>& x, double sample_rate);

}  // namespace gaitvib::biomech
