#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gaitvib/app/config.hpp"
#include "gaitvib/gaitsynth/trial.hpp"
#include "gaitvib/pig/graph.hpp"

namespace gaitvib::app {

struct PlannedTrial {
  std::uint64_t trial_id = 0;
  std::uint64_t subject_id = 0;
  gaitsynth::GaitType gait_type = gaitsynth::GaitType::Normal;
  std::uint64_t seed = 0;

  bool operator==(const PlannedTrial&) const = default;
};

/// Subjects in order, each walking every configured gait type in order:
/// normal_trials of normal gait, abnormal_trials of each abnormal type.
/// Trial ids are sequential from 0.
std::vector<PlannedTrial> plan_trials(const RunConfig& c);
gaitsynth::TrialOptions trial_options(const RunConfig& c);
gaitsynth::TrialRecord synthesize(const RunConfig& c, const PlannedTrial& p);

struct Manifest {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<PlannedTrial> trials;

  bool operator==(const Manifest&) const = default;
};

inline constexpr const char* kManifestName = "manifest.csv";

std::string manifest_text(const Manifest& m);
Manifest parse_manifest(const std::string& text);
/// Reads `dir`/manifest.csv; DataError if it is missing or malformed.
Manifest read_manifest(const std::filesystem::path& dir);

/// Synthesizes every planned trial in parallel, writes the bundles and the
/// manifest under `dir`. Throws DataError if `dir` cannot be created.
Manifest simulate_dataset(const RunConfig& c, const std::filesystem::path& dir);

/// Loads the bundles listed in a manifest and builds their cycle graphs in
/// manifest order.
std::vector<pig::GraphInstance> load_graphs(const Manifest& m, const std::filesystem::path& dir,
                                            std::size_t vib_window);

/// The same graphs as simulate_dataset followed by load_graphs, without
/// touching the disk.
std::vector<pig::GraphInstance> synthesize_graphs(const RunConfig& c, std::size_t vib_window);

}  // namespace gaitvib::app
