#include "gaitvib/biomech/anthropometry.hpp"

#include <stdexcept>

namespace gaitvib::biomech {

void Anthropometry::validate() const {
  if (!(body_mass > 0.0 && thigh_length > 0.0 && shank_length > 0.0 && foot_length > 0.0 &&
        height > 0.0)) {
    throw std::invalid_argument("anthropometry: all fields must be strictly positive");
  }
  if (!(thigh_length + shank_length + foot_length < height))
    throw std::invalid_argument("anthropometry: thigh+shank+foot must be shorter than height");
}

void RatioTable::validate() const {
  for (const auto* r : {&thigh, &shank, &foot}) {
    if (!(r->mass > 0.0 && r->com > 0.0 && r->com < 1.0 && r->gyration > 0.0 && r->gyration < 1.0))
      throw std::invalid_argument("ratio table: ratios must lie in (0, 1)");
  }
  // Two legs plus a non-empty trunk.
  if (!(2.0 * (thigh.mass + shank.mass + foot.mass) < 1.0))
    throw std::invalid_argument("ratio table: leg segment masses exceed body mass");
}

SegmentProperties segment_properties(const Anthropometry& a, const RatioTable& table) {
  a.validate();
  table.validate();
  auto seg = [&](const SegmentRatio& r) { return Segment{r.mass * a.body_mass, r.com, r.gyration}; };
  return {seg(table.thigh), seg(table.shank), seg(table.foot)};
}

}  // namespace gaitvib::biomech
