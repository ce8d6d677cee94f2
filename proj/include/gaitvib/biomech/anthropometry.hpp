#pragma once

namespace gaitvib::biomech {

inline constexpr double kGravity = 9.81;  // m/s^2

struct Anthropometry {
  double body_mass = 70.0;      // kg
  double thigh_length = 0.42;   // m
  double shank_length = 0.42;   // m
  double foot_length = 0.26;    // m
  double height = 1.72;         // m

  /// Throws std::invalid_argument on non-positive fields or when the leg
  /// segments do not fit within the standing height.
  void validate() const;

  bool operator==(const Anthropometry&) const = default;
};

/// Fraction of body mass, centre-of-mass position (fraction of segment length
/// from the proximal joint) and radius of gyration about the COM (fraction of
/// segment length) for one segment.
struct SegmentRatio {
  double mass;
  double com;
  double gyration;
};

/// Anthropometric ratio table. Defaults follow the widely used
/// Dempster-derived values for thigh, shank and foot.
struct RatioTable {
  SegmentRatio thigh{0.100, 0.433, 0.323};
  SegmentRatio shank{0.0465, 0.433, 0.302};
  SegmentRatio foot{0.0145, 0.500, 0.475};

  void validate() const;
};

struct Segment {
  double mass;            // kg
  double com_ratio;       // from proximal joint
  double gyration_ratio;  // about COM
};

/// Properties of one leg's segments.
struct SegmentProperties {
  Segment thigh;
  Segment shank;
  Segment foot;

  double leg_mass() const { return thigh.mass + shank.mass + foot.mass; }
};

SegmentProperties segment_properties(const Anthropometry& a, const RatioTable& table = {});

}  // namespace gaitvib::biomech
