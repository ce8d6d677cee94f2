#include "gaitvib/pig/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <string>

#include "gaitvib/core/error.hpp"
#include "gaitvib/core/parallel.hpp"
#include "gaitvib/core/rng.hpp"
#include "gaitvib/pig/baseline.hpp"

namespace gaitvib::pig {

std::string_view to_string(ModelKind k) noexcept { return k == ModelKind::Pig ? "pig" : "lstm"; }

ModelKind parse_model_kind(std::string_view s) {
  if (s == "pig") return ModelKind::Pig;
  if (s == "lstm") return ModelKind::Lstm;
  throw ConfigError("model must be pig or lstm, got '" + std::string(s) + "'");
}

Model init_model(ModelKind kind, const PigConfig& cfg, const Normalizer& norm, std::size_t sensors) {
  return Model{kind, cfg, norm, kind == ModelKind::Pig ? init_pig_params(cfg) : init_lstm_params(cfg, sensors)};
}

std::array<double, gaitsynth::kTargetCount> predict(const Model& m, const GraphInstance& g) {
  return m.kind == ModelKind::Pig ? pig_predict(m.params, g, m.cfg, m.norm)
                                  : lstm_predict(m.params, g, m.cfg, m.norm);
}

namespace {

struct Recorded {
  num::Var loss;
  double mse = 0.0;
};

Recorded record_loss(num::Tape& t, const Model& m, const GraphInstance& g) {
  if (m.kind == ModelKind::Pig) {
    const auto out = pig_forward(t, g, m.cfg, m.norm);
    const num::Var mse = pig_loss(t, out.angles, g.targets, out.consistency, 0.0);
    return {pig_loss(t, out.angles, g.targets, out.consistency, m.cfg.lambda), t.item(mse)};
  }
  const num::Var angles = lstm_forward(t, g, m.cfg, m.norm);
  const num::Var loss = pig_loss(t, angles, g.targets, angles, 0.0);
  return {loss, t.item(loss)};
}

// Fisher-Yates driven by uniform01 so the order is the same on every
// standard library.
template <class T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
    std::swap(v[i - 1], v[std::min(j, i - 1)]);
  }
}

}  // namespace

LossTerms loss_and_grad(const Model& m, const GraphInstance& g, std::span<double> grad) {
  num::Tape t(m.params);
  const Recorded r = record_loss(t, m, g);
  t.backward(r.loss, grad);
  return {t.item(r.loss), r.mse};
}

double loss_value(const Model& m, const GraphInstance& g) {
  num::Tape t(m.params);
  return t.item(record_loss(t, m, g).loss);
}

double mean_absolute_error(const Model& m, std::span<const GraphInstance> graphs,
                           std::span<const std::size_t> indices) {
  if (indices.empty()) throw DataError("mean absolute error of an empty split");
  std::vector<double> per(indices.size());
  parallel_for(indices.size(), [&](std::size_t k) {
    const auto& g = graphs[indices[k]];
    const auto y = predict(m, g);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += std::abs(y[i] - g.targets[i]);
    per[k] = s;
  });
  double total = 0.0;
  for (double v : per) total += v;
  return total / static_cast<double>(indices.size() * gaitsynth::kTargetCount);
}

TrainResult train(ModelKind kind, const PigConfig& cfg, std::span<const GraphInstance> graphs,
                  std::span<const std::size_t> train_idx, std::span<const std::size_t> val_idx,
                  const std::function<void(const EpochRecord&)>& on_epoch) {
  cfg.validate();
  if (train_idx.empty()) throw DataError("training split is empty");
  std::size_t sensors = 0;
  for (const auto& n : graphs[train_idx.front()].nodes) sensors += n.kind == NodeKind::Vibration;

  TrainResult result;
  result.model = init_model(kind, cfg, fit_normalizer(graphs, train_idx), sensors);
  Model& model = result.model;
  const std::size_t P = model.params.size();
  std::vector<double> m1(P, 0.0), m2(P, 0.0), grad(P);
  std::vector<std::vector<double>> item_grad(std::min(cfg.batch_size, train_idx.size()), std::vector<double>(P));
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  std::size_t step = 0;

  // Positions into train_idx; per-sample losses are summed in position order
  // so the epoch loss does not depend on the shuffle.
  std::vector<std::size_t> order(train_idx.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<LossTerms> sample_loss(train_idx.size());
  const std::span<const std::size_t> val = val_idx.empty() ? train_idx : val_idx;
  double best = std::numeric_limits<double>::infinity();
  num::ParamStore best_params = model.params;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::mt19937_64 rng(derive_seed(cfg.seed, {0x0e, epoch}));
    shuffle(order, rng);
    try {
      for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
        const std::size_t count = std::min(cfg.batch_size, order.size() - begin);
        parallel_for(count, [&](std::size_t k) {
          std::fill(item_grad[k].begin(), item_grad[k].end(), 0.0);
          sample_loss[order[begin + k]] = loss_and_grad(model, graphs[train_idx[order[begin + k]]], item_grad[k]);
        });
        std::fill(grad.begin(), grad.end(), 0.0);
        for (std::size_t k = 0; k < count; ++k) {
          for (std::size_t i = 0; i < P; ++i) grad[i] += item_grad[k][i];
        }
        ++step;
        const double inv = 1.0 / static_cast<double>(count);
        const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
        auto& w = model.params.values();
        for (std::size_t i = 0; i < P; ++i) {
          const double g = grad[i] * inv;
          m1[i] = beta1 * m1[i] + (1.0 - beta1) * g;
          m2[i] = beta2 * m2[i] + (1.0 - beta2) * g * g;
          w[i] -= cfg.learning_rate * (m1[i] / c1) / (std::sqrt(m2[i] / c2) + eps);
        }
      }
    } catch (const NumericError& e) {
      throw NumericError("training diverged at epoch " + std::to_string(epoch) + ": " + e.what());
    }
    double loss_sum = 0.0, mse_sum = 0.0;
    for (const auto& l : sample_loss) {
      loss_sum += l.loss;
      mse_sum += l.mse;
    }
    const double n = static_cast<double>(order.size());
    EpochRecord rec{epoch, loss_sum / n, mse_sum / n, 0.0};
    if (!std::isfinite(rec.train_loss))
      throw NumericError("training diverged at epoch " + std::to_string(epoch) + ": loss is not finite");
    try {
      rec.val_mae = mean_absolute_error(model, graphs, val);
    } catch (const NumericError& e) {
      throw NumericError("training diverged at epoch " + std::to_string(epoch) + ": " + e.what());
    }
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (rec.val_mae < best) {
      best = rec.val_mae;
      best_params = model.params;
      result.best_epoch = epoch;
    } else if (epoch - result.best_epoch >= cfg.patience) {
      break;
    }
  }
  model.params = std::move(best_params);
  return result;
}

Split make_split(std::span<const GraphInstance> graphs, Protocol protocol, std::uint64_t seed) {
  if (graphs.empty()) throw DataError("cannot split an empty dataset");
  struct TrialInfo {
    std::uint64_t subject;
    gaitsynth::GaitType type;
  };
  std::map<std::uint64_t, TrialInfo> trials;
  for (const auto& g : graphs) trials.emplace(g.cycle.trial_id, TrialInfo{g.subject_id, g.gait_type});

  std::vector<std::uint64_t> subjects;
  for (const auto& [id, info] : trials) subjects.push_back(info.subject);
  std::sort(subjects.begin(), subjects.end());
  subjects.erase(std::unique(subjects.begin(), subjects.end()), subjects.end());

  Split split;
  const bool loso = protocol == Protocol::LeaveOneSubjectOut;
  if (loso) split.held_out_subject = subjects[seed % subjects.size()];

  // 0 train, 1 val, 2 test per trial id.
  std::map<std::uint64_t, int> where;
  std::map<std::pair<std::uint64_t, int>, std::vector<std::uint64_t>> groups;
  for (const auto& [id, info] : trials) {
    if (loso && info.subject == split.held_out_subject) {
      where[id] = 2;
      continue;
    }
    groups[{info.subject, static_cast<int>(info.type)}].push_back(id);
  }
  for (auto& [key, ids] : groups) {
    std::mt19937_64 rng(derive_seed(seed, {0x5e, key.first, static_cast<std::uint64_t>(key.second)}));
    shuffle(ids, rng);
    const std::size_t n = ids.size();
    std::size_t test = 0;
    if (!loso && n >= 2) test = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(0.2 * static_cast<double>(n))));
    std::size_t val = 0;
    if (n - test >= 2) val = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(0.1 * static_cast<double>(n))));
    for (std::size_t i = 0; i < n; ++i) where[ids[i]] = i < test ? 2 : (i < test + val ? 1 : 0);
  }
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    switch (where.at(graphs[i].cycle.trial_id)) {
      case 0: split.train.push_back(i); break;
      case 1: split.val.push_back(i); break;
      default: split.test.push_back(i); break;
    }
  }
  return split;
}

TuneResult tune(ModelKind kind, const PigConfig& base, std::span<const std::size_t> hiddens,
                std::span<const double> rates, std::span<const GraphInstance> graphs,
                std::span<const std::size_t> train_idx, std::span<const std::size_t> val_idx,
                std::size_t epoch_budget) {
  if (hiddens.empty() || rates.empty()) throw ConfigError("tuning grid is empty");
  TuneResult out;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t h : hiddens)
    for (double lr : rates) {
      PigConfig cfg = base;
      cfg.lstm_hidden = h;
      if (kind == ModelKind::Pig) cfg.hidden_dim = h;
      cfg.learning_rate = lr;
      cfg.epochs = std::min(cfg.epochs, epoch_budget);
      const auto r = train(kind, cfg, graphs, train_idx, val_idx);
      const double mae = mean_absolute_error(r.model, graphs, val_idx.empty() ? train_idx : val_idx);
      out.grid.push_back({h, lr, mae});
      if (mae < best) {
        best = mae;
        out.best = base;
        out.best.lstm_hidden = cfg.lstm_hidden;
        out.best.hidden_dim = cfg.hidden_dim;
        out.best.learning_rate = lr;
      }
    }
  return out;
}

}  // namespace gaitvib::pig
