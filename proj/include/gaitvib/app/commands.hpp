#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gaitvib/app/config.hpp"
#include "gaitvib/app/dataset.hpp"
#include "gaitvib/pig/evaluate.hpp"
#include "gaitvib/pig/training.hpp"

namespace gaitvib::app {

/// Command-line overrides shared by every command.
struct CommandOptions {
  std::optional<std::filesystem::path> config;  // defaults when absent
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  std::optional<pig::ModelKind> model;
  std::optional<std::string> split;  // train | test | loso
};

/// Loads the config (or the defaults) and applies --seed. --out is applied by
/// each command: the dataset directory for simulate, the run directory
/// otherwise.
RunConfig resolve_config(const CommandOptions& o);
std::filesystem::path run_dir(const RunConfig& c, const CommandOptions& o);

void cmd_print_config(const CommandOptions& o, std::ostream& out);
Manifest cmd_simulate(const CommandOptions& o, std::ostream& log);

/// Which trials went where, written next to a checkpoint.
struct SplitRecord {
  pig::Protocol protocol = pig::Protocol::PerTrial;
  std::uint64_t held_out_subject = 0;
  std::vector<std::uint64_t> train, val, test;  // trial ids, ascending

  bool operator==(const SplitRecord&) const = default;
};

SplitRecord record_split(const pig::Split& s, pig::Protocol protocol, std::span<const pig::GraphInstance> graphs);
/// Graph indices whose trial belongs to `ids`.
std::vector<std::size_t> select(std::span<const pig::GraphInstance> graphs, const std::vector<std::uint64_t>& ids);

/// Every artifact starts with "# config_hash <h>" and "# seed <n>" lines.
std::string artifact_header(const std::string& kind, const RunConfig& c);
std::string split_csv(const SplitRecord& s, const RunConfig& c);
SplitRecord parse_split_csv(const std::string& text);
std::string history_csv(const std::vector<pig::EpochRecord>& h, std::size_t best_epoch, const RunConfig& c);
std::string tuning_csv(const pig::TuneResult& t, const RunConfig& c);

struct TrainOutcome {
  pig::TrainResult result;
  std::optional<pig::TuneResult> tuning;
};

/// Tunes (when enabled) and trains one model on graphs[split]. Epoch lines go
/// to `log` when it is non-null.
TrainOutcome train_model(const RunConfig& c, pig::ModelKind kind, std::span<const pig::GraphInstance> graphs,
                         const pig::Split& split, std::ostream* log);

struct TrainArtifacts {
  std::filesystem::path checkpoint, history, split, tuning;
  TrainOutcome outcome;
};

/// Needs a manifest in dataset.dir. Writes <model>_checkpoint.txt,
/// <model>_history.csv, <model>_split.csv and, when tuning ran,
/// <model>_tuning.csv under the run directory.
TrainArtifacts cmd_train(const CommandOptions& o, std::ostream& log);

struct EvalArtifacts {
  std::vector<std::filesystem::path> reports;
  std::filesystem::path chart;
  std::vector<std::pair<pig::ModelKind, pig::Report>> results;
};

/// Evaluates the selected model, or every checkpoint present, on the chosen
/// split (test by default). `loso` needs a leave-one-subject-out checkpoint.
/// Writes report_<model>_<split>.csv and segments_<split>.svg.
EvalArtifacts cmd_eval(const CommandOptions& o, std::ostream& log);

std::string report_document(const pig::Report& r, const RunConfig& c, pig::ModelKind kind,
                            const std::string& split);
/// Per-segment MAE of each model as a grouped bar chart.
std::string segment_chart(const std::vector<std::pair<pig::ModelKind, pig::Report>>& results,
                          const RunConfig& c, const std::string& split);

}  // namespace gaitvib::app
