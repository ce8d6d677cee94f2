#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gaitvib/core/param_store.hpp"
#include "gaitvib/core/tape.hpp"
#include "gaitvib/pig/graph.hpp"
#include "gaitvib/pig/normalizer.hpp"

namespace gaitvib::pig {

/// Hyperparameters shared by the graph model and the LSTM baseline (which
/// uses lstm_hidden, frame_length and the optimiser fields).
struct PigConfig {
  std::size_t hidden_dim = 32;
  std::size_t attention_heads = 2;
  std::size_t lstm_hidden = 32;
  std::size_t message_rounds = 3;
  std::size_t vib_window = kDefaultVibWindow;  // samples per vibration node
  std::size_t frame_length = 32;               // samples per recurrent step
  double learning_rate = 3e-3;
  double lambda = 0.1;  // consistency weight
  std::size_t epochs = 60;
  std::size_t batch_size = 16;
  std::size_t patience = 10;
  std::uint64_t seed = 1;

  /// Throws ConfigError naming the first invalid field.
  void validate() const;
  bool operator==(const PigConfig&) const = default;
};

/// All slices of the graph model, initialised from cfg.seed.
num::ParamStore init_pig_params(const PigConfig& cfg);

struct ForceEmbedding {
  num::Var total;                  // lstm_hidden x 1
  std::vector<num::Var> sensors;   // per vibration node, in node order
};

/// Structure-property learner: one shared LSTM encodes each vibration
/// window (frame_length samples per step, stopping after the last valid
/// frame); the embeddings of vibration nodes wired to the latent force node
/// are summed. Throws DataError when a window is not cfg.vib_window long.
ForceEmbedding force_aggregate(num::Tape& t, const GraphInstance& g, const PigConfig& cfg,
                               const Normalizer& norm = {});

struct BiomechEmbedding {
  num::Var total;                                                 // lstm_hidden x 1
  std::vector<std::array<double, gaitsynth::kTargetCount>> attention;  // [head][joint slot]
};

/// Biomechanical path on the initial joint embeddings with an empty latent
/// force query: joint states pass through (sin W1 h, cos W2 h), the body
/// features through an affine map, and each head's attention over the
/// elementwise products weights their sum. Heads are averaged. Slots with
/// joint_mask[slot] == false are left out of the attention.
BiomechEmbedding biomech_constrain(num::Tape& t, const GraphInstance& g, const PigConfig& cfg,
                                   std::span<const bool> joint_mask = {});

struct PigOutput {
  num::Var angles;       // 12 x 1, deg, by target slot
  num::Var consistency;  // 1 x 1, mean over rounds of |F_vib - F_bio|^2 / lstm_hidden
};

/// Typed message passing over cfg.message_rounds rounds. Each round the
/// latent force node is rewritten from the two physics paths, every other
/// node takes a residual tanh update from the mean of its incoming typed
/// messages, and a shared linear head reads each joint node out.
PigOutput pig_forward(num::Tape& t, const GraphInstance& g, const PigConfig& cfg, const Normalizer& norm);

std::array<double, gaitsynth::kTargetCount> pig_predict(const num::ParamStore& params, const GraphInstance& g,
                                                        const PigConfig& cfg, const Normalizer& norm);

/// Mean squared error over the 12 angles plus lambda * consistency.
num::Var pig_loss(num::Tape& t, num::Var pred, const gaitsynth::TargetAngles& target, num::Var consistency,
                  double lambda);
/// Same on plain values. Throws NumericError on non-finite input and
/// std::invalid_argument on negative lambda or a wrong prediction size.
double pig_loss(std::span<const double> pred, const gaitsynth::TargetAngles& target, double consistency,
                double lambda);

}  // namespace gaitvib::pig
