#pragma once

#include <cstdint>
#include <vector>

#include "gaitvib/biomech/inverse_dynamics.hpp"
#include "gaitvib/floorsim/floor.hpp"
#include "gaitvib/gaitsynth/cycles.hpp"
#include "gaitvib/gaitsynth/templates.hpp"
#include "gaitvib/gaitsynth/trajectory.hpp"

namespace gaitvib::gaitsynth {

struct Subject {
  std::uint64_t id = 0;
  biomech::Anthropometry anthropometry;
  double cadence_factor = 1.0;  // personal pace relative to the template cadence
  std::uint64_t seed = 0;       // drives subject-level gait offsets
};

/// Random adult: height ~ N(1.72, 0.08) m, BMI ~ N(23.5, 2.5), segment
/// lengths proportional to height with 3% individual variation.
Subject make_subject(std::uint64_t id, std::uint64_t dataset_seed);

struct TrialOptions {
  int n_cycles = 2;                  // right-foot cycles; the left foot adds one
  double cadence_jitter = 0.02;      // relative, per trial
  GaitVariability variability;
  biomech::InverseDynamicsOptions dynamics;
  floorsim::Geophone geophone;
  double padding = 1.0;              // s of walking simulated before and after the record
  double step_length_ratio = 0.36;   // of height
  double foot_spacing = 0.08;        // m, lateral offset of each foot from the walkway line
  double mocap_rate = 100.0;         // Hz
};

/// One walking trial. Every stored number is rounded to 9 significant digits,
/// the precision of the bundle files, so a saved record loads back identical.
struct TrialRecord {
  std::uint64_t trial_id = 0;
  std::uint64_t subject_id = 0;
  GaitType gait_type = GaitType::Normal;
  biomech::Anthropometry anthropometry;
  std::uint64_t seed = 0;
  double cadence = 0.0;  // steps/min
  biomech::JointTrajectory left;
  biomech::JointTrajectory right;
  BilateralEvents events;
  biomech::BilateralGrf grf;
  floorsim::VibrationRecord vibration;

  const biomech::JointTrajectory& trajectory(Foot f) const noexcept {
    return f == Foot::Left ? left : right;
  }
  std::vector<GaitCycle> cycles() const { return extract_cycles(events, trial_id); }

  bool operator==(const TrialRecord&) const = default;
};

/// Composes gait synthesis, inverse dynamics, the floor model and the
/// geophone. Walking is simulated over a padded span (force faded in over the
/// first half of the padding so the floor starts at rest) and then cropped to
/// the record. Footfalls lie on a straight walkway centred in the sensor
/// area; footfalls that fall in the padding are clamped to the area's edge.
TrialRecord synth_trial(GaitType type, const Subject& subject, std::uint64_t trial_id,
                        std::uint64_t trial_seed, const floorsim::FloorModel& floor,
                        const TrialOptions& opts = {});

/// Footfalls of one bilateral GRF, one per stance run of each foot, placed
/// in strike order at step_length intervals along the sensor area's midline,
/// right foot on the -y side. The footfalls touching [record_begin,
/// record_end] are centred in the area; positions are clamped to it.
std::vector<floorsim::Footfall> footfalls_from_grf(const biomech::BilateralGrf& grf,
                                                   const floorsim::FloorModel& floor,
                                                   double step_length, double foot_spacing,
                                                   double record_begin, double record_end);

}  // namespace gaitvib::gaitsynth
