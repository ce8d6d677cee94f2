#pragma once

#include <array>
#include <string_view>

namespace gaitvib::gaitsynth {

enum class GaitType { Normal, ToeWalking, FlexedKnee, FootDrag };
inline constexpr std::array<GaitType, 4> kGaitTypes{GaitType::Normal, GaitType::ToeWalking,
                                                    GaitType::FlexedKnee, GaitType::FootDrag};

std::string_view to_string(GaitType g) noexcept;
/// Throws std::invalid_argument for unknown names.
GaitType parse_gait_type(std::string_view name);
inline bool is_abnormal(GaitType g) noexcept { return g != GaitType::Normal; }

enum class Joint { Hip, Knee, Ankle };
inline constexpr std::array<Joint, 3> kJoints{Joint::Hip, Joint::Knee, Joint::Ankle};
std::string_view to_string(Joint j) noexcept;

/// theta(p) = a0 + sum_k a_k cos(2 pi k p) + b_k sin(2 pi k p), k = 1..4,
/// p = fraction of the gait cycle from foot strike.
struct FourierCurve {
  double a0 = 0.0;
  std::array<double, 4> a{};
  std::array<double, 4> b{};

  double operator()(double phase) const noexcept;
};

struct GaitTemplate {
  FourierCurve hip;
  FourierCurve knee;
  FourierCurve ankle;
  double stance_fraction;  // foot-off phase
  double cadence;          // steps/min

  const FourierCurve& curve(Joint j) const noexcept;
};

/// Artifact-authored sagittal templates, degrees. Qualitative signatures:
/// toe walking contacts with a plantarflexed ankle, flexed-knee gait keeps the
/// knee flexed through stance, foot drag lacks swing dorsiflexion.
const GaitTemplate& gait_template(GaitType g) noexcept;

}  // namespace gaitvib::gaitsynth
