#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gaitvib/floorsim/floor.hpp"
#include "gaitvib/gaitsynth/templates.hpp"
#include "gaitvib/gaitsynth/trajectory.hpp"
#include "gaitvib/pig/model.hpp"
#include "gaitvib/pig/training.hpp"

namespace gaitvib::app {

struct DatasetConfig {
  std::string dir = "data";
  std::size_t subjects = 20;
  std::size_t normal_trials = 20;    // per subject
  std::size_t abnormal_trials = 10;  // per subject and abnormal gait type
  std::vector<gaitsynth::GaitType> gait_types{gaitsynth::kGaitTypes.begin(), gaitsynth::kGaitTypes.end()};
  int cycles_per_trial = 2;          // right-foot cycles; the left foot adds one
  double padding = 1.0;              // s
  double cadence_jitter = 0.02;
  gaitsynth::GaitVariability variability;
};

struct TuningConfig {
  bool enabled = false;
  std::size_t epochs = 3;  // budget per grid point
  std::vector<std::size_t> hidden{16, 32, 48};
  std::vector<double> learning_rate{1e-3, 3e-3, 1e-2, 3e-2};
};

/// Everything a run needs. `seed` drives dataset synthesis, splits, weight
/// initialisation and shuffling; `pig.seed` and `lstm.seed` are overwritten
/// by it and are not part of the document.
struct RunConfig {
  std::uint64_t seed = 2024;
  std::string output_dir = "out";
  DatasetConfig dataset;
  floorsim::FloorModel floor;
  floorsim::Geophone geophone;
  pig::PigConfig pig;
  pig::PigConfig lstm;  // only lstm_hidden, frame_length, vib_window and optimiser fields apply
  pig::Protocol protocol = pig::Protocol::PerTrial;
  TuningConfig tuning;

  RunConfig();
  /// Throws ConfigError naming the offending key.
  void validate() const;
  /// Model config with the run seed filled in.
  pig::PigConfig model_config(pig::ModelKind kind) const;
};

/// Pretty-printed JSON of every field, in a fixed key order.
std::string to_text(const RunConfig& c);
/// Parses a (possibly partial) JSON document over the defaults. Unknown keys
/// and wrongly typed values throw ConfigError naming the dotted key.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// 64-bit FNV-1a of to_text(c) with dataset.dir and output_dir cleared, as
/// 16 hex digits. Locations do not change any numeric output.
std::string config_hash(const RunConfig& c);
std::uint64_t fnv1a(const std::string& bytes) noexcept;

}  // namespace gaitvib::app
