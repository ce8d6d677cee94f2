#include "gaitvib/pig/recurrent.hpp"

#include <algorithm>
#include <vector>

namespace gaitvib::pig {

void register_lstm(num::ParamStore& p, const std::string& prefix, std::size_t input, std::size_t hidden) {
  p.add(prefix + ".Wx", {4 * hidden, input});
  p.add(prefix + ".Wh", {4 * hidden, hidden});
  p.add(prefix + ".b", {4 * hidden, 1}, num::Init::Zeros);
  auto b = p.view(prefix + ".b");
  std::fill(b.begin() + static_cast<std::ptrdiff_t>(hidden),
            b.begin() + static_cast<std::ptrdiff_t>(2 * hidden), 1.0);
}

LstmWeights lstm_weights(num::Tape& t, const std::string& prefix) {
  LstmWeights w{t.param(prefix + ".Wx"), t.param(prefix + ".Wh"), t.param(prefix + ".b"), 0};
  w.hidden = t.shape(w.Wh).cols;
  return w;
}

num::Var lstm_run(num::Tape& t, const LstmWeights& w, std::span<const num::Var> inputs) {
  const std::size_t h = w.hidden;
  if (inputs.empty()) return t.constant(std::vector<double>(h, 0.0));
  num::Var hs{}, cs{};
  bool first = true;
  for (num::Var x : inputs) {
    num::Var z = t.matmul(w.Wx, x) + w.b;
    if (!first) z = z + t.matmul(w.Wh, hs);
    num::Var i = t.sigmoid(t.slice(z, 0, h));
    num::Var f = t.sigmoid(t.slice(z, h, h));
    num::Var g = t.tanh(t.slice(z, 2 * h, h));
    num::Var o = t.sigmoid(t.slice(z, 3 * h, h));
    cs = first ? i * g : f * cs + i * g;
    hs = o * t.tanh(cs);
    first = false;
  }
  return hs;
}

std::vector<double> frame_of(std::span<const double> window, std::size_t valid, std::size_t frame,
                             std::size_t k, double scale) {
  std::vector<double> out(frame, 0.0);
  const std::size_t begin = k * frame;
  const std::size_t end = std::min({valid, begin + frame, window.size()});
  for (std::size_t i = begin; i < end; ++i) out[i - begin] = window[i] / scale;
  return out;
}

}  // namespace gaitvib::pig
