#include "gaitvib/pig/baseline.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "gaitvib/core/error.hpp"
#include "gaitvib/pig/recurrent.hpp"

namespace gaitvib::pig {

num::ParamStore init_lstm_params(const PigConfig& cfg, std::size_t sensors) {
  cfg.validate();
  if (sensors == 0) throw ConfigError("baseline needs at least one sensor");
  num::ParamStore p(cfg.seed);
  register_lstm(p, "lstm.cell", sensors * cfg.frame_length, cfg.lstm_hidden);
  p.add("lstm.head.W", {gaitsynth::kTargetCount, cfg.lstm_hidden});
  p.add("lstm.head.b", {gaitsynth::kTargetCount, 1}, num::Init::Zeros);
  return p;
}

num::Var lstm_forward(num::Tape& t, const GraphInstance& g, const PigConfig& cfg, const Normalizer& norm) {
  std::vector<const Node*> sensors;
  for (const auto& n : g.nodes)
    if (n.kind == NodeKind::Vibration) sensors.push_back(&n);
  std::sort(sensors.begin(), sensors.end(), [](const Node* a, const Node* b) { return a->slot < b->slot; });
  const LstmWeights w = lstm_weights(t, "lstm.cell");
  if (t.shape(w.Wx).cols != sensors.size() * cfg.frame_length)
    throw DataError("baseline expects " + std::to_string(t.shape(w.Wx).cols / cfg.frame_length) +
                    " sensors, graph has " + std::to_string(sensors.size()));
  for (const Node* s : sensors)
    if (s->features.size() != cfg.vib_window)
      throw DataError("vibration window of " + std::to_string(s->features.size()) + " samples, model expects " +
                      std::to_string(cfg.vib_window));
  if (g.vib_valid > cfg.vib_window) throw DataError("vibration validity exceeds the window");

  const std::size_t steps = frame_count(g.vib_valid, cfg.frame_length);
  std::vector<num::Var> inputs;
  std::vector<double> x;
  for (std::size_t k = 0; k < steps; ++k) {
    x.clear();
    for (const Node* s : sensors) {
      const auto f = frame_of(s->features, g.vib_valid, cfg.frame_length, k, norm.vib_scale);
      x.insert(x.end(), f.begin(), f.end());
    }
    inputs.push_back(t.constant(x));
  }
  const num::Var h = lstm_run(t, w, inputs);
  const num::Var y = t.matmul(t.param("lstm.head.W"), h) + t.param("lstm.head.b");
  return y * t.constant(norm.target_std) + t.constant(norm.target_mean);
}

std::array<double, gaitsynth::kTargetCount> lstm_predict(const num::ParamStore& params, const GraphInstance& g,
                                                         const PigConfig& cfg, const Normalizer& norm) {
  num::Tape t(params);
  const auto v = t.value(lstm_forward(t, g, cfg, norm));
  std::array<double, gaitsynth::kTargetCount> y{};
  std::copy(v.begin(), v.end(), y.begin());
  return y;
}

}  // namespace gaitvib::pig
