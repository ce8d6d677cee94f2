#pragma once

#include <filesystem>
#include <string>

#include "gaitvib/gaitsynth/trial.hpp"

namespace gaitvib::gaitsynth {

inline constexpr int kBundleFormatVersion = 1;

/// "trial_<id>", id zero-padded to five digits.
std::string trial_dir_name(std::uint64_t trial_id);

/// Writes `root/trial_<id>/` with meta.txt (key=value), angles.csv, grf.csv
/// and vib.csv. Numbers carry 9 significant digits. Returns the directory.
std::filesystem::path save_trial(const TrialRecord& trial, const std::filesystem::path& root);

/// Reads a directory written by save_trial. Throws DataError naming the file
/// (and line, for CSV content) on any missing or malformed entry.
TrialRecord load_trial(const std::filesystem::path& trial_dir);

}  // namespace gaitvib::gaitsynth
