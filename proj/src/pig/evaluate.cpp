#include "gaitvib/pig/evaluate.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "gaitvib/core/error.hpp"
#include "gaitvib/core/numfmt.hpp"
#include "gaitvib/core/parallel.hpp"

namespace gaitvib::pig {

using gaitsynth::GaitEvent;
using gaitsynth::Joint;

const ReportRow& Report::at(std::string_view group, std::string_view key) const {
  for (const auto& r : rows)
    if (r.group == group && r.key == key) return r;
  throw std::out_of_range("no report row " + std::string(group) + "/" + std::string(key));
}

namespace {

// Sum of absolute errors and count of angles for one cell.
struct Cell {
  double abs_sum = 0.0;
  std::size_t angles = 0;
  std::size_t cycles = 0;
};

ReportRow row(std::string group, std::string key, const Cell& c) {
  return {std::move(group), std::move(key), c.angles ? c.abs_sum / static_cast<double>(c.angles) : 0.0,
          c.cycles};
}

}  // namespace

Report evaluate(std::span<const Prediction> predictions) {
  if (predictions.empty()) throw DataError("cannot evaluate an empty split");
  Cell overall;
  std::array<Cell, 3> joint;
  std::array<Cell, 2> phase;  // stance, swing
  std::array<Cell, 4> gait;
  std::array<Cell, gaitsynth::kTargetCount> segment;
  for (const auto& p : predictions) {
    std::array<bool, 3> seen_joint{};
    std::array<bool, 2> seen_phase{};
    for (Joint j : gaitsynth::kJoints)
      for (GaitEvent e : gaitsynth::kGaitEvents) {
        const std::size_t k = gaitsynth::target_index(j, e);
        const double err = std::abs(p.angles[k] - p.target[k]);
        if (!std::isfinite(err)) throw NumericError("non-finite prediction in evaluation");
        const auto ji = static_cast<std::size_t>(j);
        const std::size_t pi = gaitsynth::is_stance_event(e) ? 0 : 1;
        for (Cell* c : {&overall, &joint[ji], &phase[pi], &gait[static_cast<std::size_t>(p.gait_type)], &segment[k]}) {
          c->abs_sum += err;
          ++c->angles;
        }
        ++segment[k].cycles;
        seen_joint[ji] = true;
        seen_phase[pi] = true;
      }
    ++overall.cycles;
    ++gait[static_cast<std::size_t>(p.gait_type)].cycles;
    for (std::size_t i = 0; i < 3; ++i) joint[i].cycles += seen_joint[i];
    for (std::size_t i = 0; i < 2; ++i) phase[i].cycles += seen_phase[i];
  }
  Report r;
  r.rows.push_back(row("overall", "all", overall));
  for (Joint j : gaitsynth::kJoints)
    r.rows.push_back(row("joint", std::string(to_string(j)), joint[static_cast<std::size_t>(j)]));
  r.rows.push_back(row("phase", "stance", phase[0]));
  r.rows.push_back(row("phase", "swing", phase[1]));
  for (auto t : gaitsynth::kGaitTypes)
    r.rows.push_back(row("gait_type", std::string(to_string(t)), gait[static_cast<std::size_t>(t)]));
  for (Joint j : gaitsynth::kJoints)
    for (GaitEvent e : gaitsynth::kGaitEvents)
      r.rows.push_back(row("segment", std::string(to_string(j)) + "_" + std::string(to_string(e)),
                           segment[gaitsynth::target_index(j, e)]));
  return r;
}

std::vector<Prediction> predict_all(const Model& m, std::span<const GraphInstance> graphs,
                                    std::span<const std::size_t> indices) {
  std::vector<Prediction> out(indices.size());
  parallel_for(indices.size(), [&](std::size_t k) {
    const auto& g = graphs[indices[k]];
    out[k] = {predict(m, g), g.targets, g.gait_type};
  });
  return out;
}

Report evaluate(const Model& m, std::span<const GraphInstance> graphs, std::span<const std::size_t> indices) {
  const auto p = predict_all(m, graphs, indices);
  return evaluate(p);
}

std::string report_csv(const Report& r) {
  std::ostringstream os;
  os << "group,key,mae_deg,cycles\n";
  for (const auto& row : r.rows)
    os << row.group << ',' << row.key << ',' << format_sig(row.mae, 9) << ',' << row.cycles << '\n';
  return os.str();
}

}  // namespace gaitvib::pig
