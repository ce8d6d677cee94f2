#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gaitvib/gaitsynth/cycles.hpp"
#include "gaitvib/pig/graph.hpp"
#include "gaitvib/pig/training.hpp"

namespace gaitvib::pig {

struct Prediction {
  std::array<double, gaitsynth::kTargetCount> angles{};
  gaitsynth::TargetAngles target;
  gaitsynth::GaitType gait_type = gaitsynth::GaitType::Normal;
};

/// `cycles` is the number of cycles behind the cell; a cell with no cycles
/// reports 0.
struct ReportRow {
  std::string group;  // overall, joint, phase, gait_type, segment
  std::string key;
  double mae = 0.0;   // deg
  std::size_t cycles = 0;
};

struct Report {
  std::vector<ReportRow> rows;

  /// Throws std::out_of_range when the row does not exist.
  const ReportRow& at(std::string_view group, std::string_view key) const;
};

/// 22 rows: overall, 3 joints, 2 phases (stance = strike, loading response
/// and off; swing = mid-swing), 4 gait types and the 12 joint x event
/// segments. Throws DataError on an empty prediction set.
Report evaluate(std::span<const Prediction> predictions);

std::vector<Prediction> predict_all(const Model& m, std::span<const GraphInstance> graphs,
                                    std::span<const std::size_t> indices);
Report evaluate(const Model& m, std::span<const GraphInstance> graphs, std::span<const std::size_t> indices);

/// "group,key,mae_deg,cycles" with MAE at 9 significant digits.
std::string report_csv(const Report& r);

}  // namespace gaitvib::pig
