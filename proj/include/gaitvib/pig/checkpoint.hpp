#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "gaitvib/pig/training.hpp"

namespace gaitvib::pig {

inline constexpr int kCheckpointVersion = 1;

/// Provenance echoed into the checkpoint by the caller.
struct CheckpointMeta {
  std::string config_hash;
  std::uint64_t seed = 0;

  bool operator==(const CheckpointMeta&) const = default;
};

/// Text document: a version line, the meta fields, the model config, the
/// normalizer, the slice table (name offset rows cols) and every parameter
/// value at 17 significant digits, one per line. Loads back bit-identical.
void write_checkpoint(std::ostream& os, const Model& m, const CheckpointMeta& meta);
void save_checkpoint(const std::filesystem::path& path, const Model& m, const CheckpointMeta& meta);

struct LoadedCheckpoint {
  Model model;
  CheckpointMeta meta;
};

/// Throws ConfigError on a format version or slice layout that does not
/// match this build, and DataError on malformed content (naming the line).
LoadedCheckpoint read_checkpoint(std::istream& is);
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace gaitvib::pig
