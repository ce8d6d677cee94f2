#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gaitvib/core/param_store.hpp"
#include "gaitvib/core/tape.hpp"

namespace gaitvib::pig {

/// LSTM cell weights on a tape. Gate rows are ordered input, forget, cell,
/// output.
struct LstmWeights {
  num::Var Wx;
  num::Var Wh;
  num::Var b;
  std::size_t hidden = 0;
};

/// Registers <prefix>.Wx (4h x input), <prefix>.Wh (4h x h) and <prefix>.b
/// with the forget-gate bias at 1.
void register_lstm(num::ParamStore& p, const std::string& prefix, std::size_t input, std::size_t hidden);
LstmWeights lstm_weights(num::Tape& t, const std::string& prefix);

/// Final hidden state after feeding `inputs` from a zero state; the zero
/// vector when there are no inputs.
num::Var lstm_run(num::Tape& t, const LstmWeights& w, std::span<const num::Var> inputs);

/// Frames needed to cover `valid` samples.
inline std::size_t frame_count(std::size_t valid, std::size_t frame) {
  return (valid + frame - 1) / frame;
}

/// Frame k of a zero-padded window, divided by `scale`; samples at or past
/// `valid` read as zero.
std::vector<double> frame_of(std::span<const double> window, std::size_t valid, std::size_t frame,
                             std::size_t k, double scale);

}  // namespace gaitvib::pig
