#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "gaitvib/core/param_store.hpp"
#include "gaitvib/pig/graph.hpp"
#include "gaitvib/pig/model.hpp"
#include "gaitvib/pig/normalizer.hpp"

namespace gaitvib::pig {

enum class ModelKind { Pig, Lstm };
std::string_view to_string(ModelKind k) noexcept;
/// "pig" or "lstm"; throws ConfigError otherwise.
ModelKind parse_model_kind(std::string_view s);

struct Model {
  ModelKind kind = ModelKind::Pig;
  PigConfig cfg;
  Normalizer norm;
  num::ParamStore params;

  bool operator==(const Model&) const = default;
};

/// Fresh parameters for `kind` seeded from cfg.seed.
Model init_model(ModelKind kind, const PigConfig& cfg, const Normalizer& norm = {}, std::size_t sensors = 4);

std::array<double, gaitsynth::kTargetCount> predict(const Model& m, const GraphInstance& g);

struct LossTerms {
  double loss = 0.0;
  double mse = 0.0;
};

/// Training loss of one graph; adds its gradient into `grad`.
LossTerms loss_and_grad(const Model& m, const GraphInstance& g, std::span<double> grad);
double loss_value(const Model& m, const GraphInstance& g);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;  // mean over the epoch's batches, before each step
  double train_mse = 0.0;   // deg^2
  double val_mae = 0.0;     // deg, after the epoch

  bool operator==(const EpochRecord&) const = default;
};

struct TrainResult {
  Model model;  // parameters of the best validation epoch
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
};

/// Adam (beta 0.9 / 0.999, eps 1e-8) on mini-batches of cfg.batch_size,
/// reshuffled each epoch from cfg.seed. Batch gradients are evaluated in
/// parallel and reduced in sample order, so results do not depend on the
/// thread count. Stops after cfg.patience epochs without a new best
/// validation MAE; with an empty validation split the training graphs stand
/// in for it. The normalizer is fitted on the training split.
///
/// Throws DataError on an empty training split and NumericError naming the
/// epoch when the loss or a gradient stops being finite.
TrainResult train(ModelKind kind, const PigConfig& cfg, std::span<const GraphInstance> graphs,
                  std::span<const std::size_t> train_idx, std::span<const std::size_t> val_idx,
                  const std::function<void(const EpochRecord&)>& on_epoch = {});

/// Mean absolute error over all 12 angles of graphs[indices].
double mean_absolute_error(const Model& m, std::span<const GraphInstance> graphs,
                           std::span<const std::size_t> indices);

enum class Protocol { PerTrial, LeaveOneSubjectOut };

/// Graph indices of each partition, ascending.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
  std::uint64_t held_out_subject = 0;  // leave-one-subject-out only
};

/// Whole trials are assigned to partitions, so the cycles of one trial never
/// straddle train and test. PerTrial: within every (subject, gait type)
/// group, 20% of trials go to test and 10% to validation, at least one each
/// when the group is large enough. LeaveOneSubjectOut: the subject at
/// position seed mod n (ascending ids) is the test set; 10% of the other
/// trials validate.
Split make_split(std::span<const GraphInstance> graphs, Protocol protocol, std::uint64_t seed);

struct GridPoint {
  std::size_t hidden = 0;
  double learning_rate = 0.0;
  double val_mae = 0.0;
};

struct TuneResult {
  PigConfig best;
  std::vector<GridPoint> grid;
};

/// Budgeted grid search: every (hidden size, learning rate) pair is trained
/// for at most `epoch_budget` epochs on `train_idx` and scored on `val_idx`.
/// For the graph model `hidden` sets both hidden_dim and lstm_hidden. Ties
/// keep the earlier point.
TuneResult tune(ModelKind kind, const PigConfig& base, std::span<const std::size_t> hiddens,
                std::span<const double> rates, std::span<const GraphInstance> graphs,
                std::span<const std::size_t> train_idx, std::span<const std::size_t> val_idx,
                std::size_t epoch_budget);

}  // namespace gaitvib::pig
