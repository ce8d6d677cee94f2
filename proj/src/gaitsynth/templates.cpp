#include "gaitvib/gaitsynth/templates.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace gaitvib::gaitsynth {

std::string_view to_string(GaitType g) noexcept {
  switch (g) {
    case GaitType::Normal: return "normal";
    case GaitType::ToeWalking: return "toe_walking";
    case GaitType::FlexedKnee: return "flexed_knee";
    case GaitType::FootDrag: return "foot_drag";
  }
  return "?";
}

GaitType parse_gait_type(std::string_view name) {
  for (GaitType g : kGaitTypes)
    if (to_string(g) == name) return g;
  throw std::invalid_argument("unknown gait type: " + std::string(name));
}

std::string_view to_string(Joint j) noexcept {
  switch (j) {
    case Joint::Hip: return "hip";
    case Joint::Knee: return "knee";
    case Joint::Ankle: return "ankle";
  }
  return "?";
}

double FourierCurve::operator()(double phase) const noexcept {
  double v = a0;
  for (int k = 1; k <= 4; ++k) {
    const double w = 2.0 * std::numbers::pi * k * phase;
    v += a[k - 1] * std::cos(w) + b[k - 1] * std::sin(w);
  }
  return v;
}

const FourierCurve& GaitTemplate::curve(Joint j) const noexcept {
  switch (j) {
    case Joint::Hip: return hip;
    case Joint::Knee: return knee;
    case Joint::Ankle: return ankle;
  }
  return hip;
}

namespace {

// Least-squares 4-harmonic fits to keyframed curves.
const GaitTemplate kNormal{
    {14.542, {19.924, -3.142, -0.784, -0.354}, {0.107, -2.534, -0.073, 0.071}},
    {22.949, {-1.698, -14.240, -1.645, 0.214}, {-18.859, 5.744, 2.633, -0.268}},
    {-0.546, {-0.943, 1.723, -0.340, 0.903}, {6.601, -9.506, 1.025, -0.630}},
    0.62, 110.0};

const GaitTemplate kToeWalking{
    {17.785, {19.468, -2.838, -0.837, -0.399}, {0.025, -2.419, -0.165, 0.091}},
    {28.200, {-1.676, -9.625, -0.560, 0.099}, {-16.333, 6.686, 1.895, -0.256}},
    {-14.117, {-0.129, -0.141, -1.328, 0.013}, {8.132, -4.373, 2.189, -0.368}},
    0.60, 112.0};

const GaitTemplate kFlexedKnee{
    {26.936, {15.534, -0.865, -0.746, -0.662}, {3.503, -3.019, -0.970, -0.068}},
    {42.191, {1.748, -9.988, -2.293, 0.405}, {-9.737, -0.026, 2.378, 0.543}},
    {7.140, {-4.266, 3.335, -0.977, 0.604}, {3.706, -5.744, 0.426, 0.012}},
    0.66, 95.0};

const GaitTemplate kFootDrag{
    {11.315, {18.379, -1.365, -0.748, -0.407}, {2.230, -2.497, -0.444, 0.041}},
    {18.236, {-0.375, -9.749, -1.818, 0.057}, {-11.920, 3.372, 1.589, 0.076}},
    {-5.563, {-4.963, 3.556, 0.236, 1.310}, {9.133, -6.336, 1.014, -0.415}},
    0.64, 98.0};

}  // namespace

const GaitTemplate& gait_template(GaitType g) noexcept {
  switch (g) {
    case GaitType::Normal: return kNormal;
    case GaitType::ToeWalking: return kToeWalking;
    case GaitType::FlexedKnee: return kFlexedKnee;
    case GaitType::FootDrag: return kFootDrag;
  }
  return kNormal;
}

}  // namespace gaitvib::gaitsynth
