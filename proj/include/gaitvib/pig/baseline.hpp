#pragma once

#include <array>
#include <cstddef>

#include "gaitvib/core/param_store.hpp"
#include "gaitvib/core/tape.hpp"
#include "gaitvib/pig/graph.hpp"
#include "gaitvib/pig/model.hpp"
#include "gaitvib/pig/normalizer.hpp"

namespace gaitvib::pig {

/// LSTM over the cycle's vibration windows with the sensors concatenated as
/// channels (frame_length samples of every sensor per step), then an affine
/// head from the final hidden state to the 12 angles. Uses cfg.lstm_hidden,
/// cfg.frame_length and cfg.vib_window.
num::ParamStore init_lstm_params(const PigConfig& cfg, std::size_t sensors = 4);

/// 12 x 1 angles in degrees. Throws DataError when the graph's sensor count
/// or window length does not match the parameters.
num::Var lstm_forward(num::Tape& t, const GraphInstance& g, const PigConfig& cfg, const Normalizer& norm);

std::array<double, gaitsynth::kTargetCount> lstm_predict(const num::ParamStore& params, const GraphInstance& g,
                                                         const PigConfig& cfg, const Normalizer& norm);

}  // namespace gaitvib::pig
