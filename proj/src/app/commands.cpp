#include "gaitvib/app/commands.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "gaitvib/app/svg.hpp"
#include "gaitvib/core/error.hpp"
#include "gaitvib/core/numfmt.hpp"
#include "gaitvib/pig/checkpoint.hpp"

namespace gaitvib::app {

namespace fs = std::filesystem;

RunConfig resolve_config(const CommandOptions& o) {
  RunConfig c = o.config ? load_config(*o.config) : RunConfig{};
  if (o.seed) c.seed = *o.seed;
  c.validate();
  return c;
}

fs::path run_dir(const RunConfig& c, const CommandOptions& o) { return o.out ? *o.out : fs::path(c.output_dir); }

void cmd_print_config(const CommandOptions& o, std::ostream& out) { out << to_text(resolve_config(o)); }

Manifest cmd_simulate(const CommandOptions& o, std::ostream& log) {
  const RunConfig c = resolve_config(o);
  const fs::path dir = o.out ? *o.out : fs::path(c.dataset.dir);
  const Manifest m = simulate_dataset(c, dir);
  log << "wrote " << m.trials.size() << " trials and " << kManifestName << " to " << dir.string() << "\n";
  return m;
}

namespace {

void write_file(const fs::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream os(path, std::ios::binary);
  os << text;
  if (!os) throw DataError("cannot write " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("missing file " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string protocol_name(pig::Protocol p) { return p == pig::Protocol::PerTrial ? "per_trial" : "loso"; }

std::vector<std::uint64_t> trial_ids(std::span<const pig::GraphInstance> graphs, std::span<const std::size_t> idx) {
  std::set<std::uint64_t> ids;
  for (auto i : idx) ids.insert(graphs[i].cycle.trial_id);
  return {ids.begin(), ids.end()};
}

std::string g9(double v) { return format_sig(v, 9); }

}  // namespace

SplitRecord record_split(const pig::Split& s, pig::Protocol protocol, std::span<const pig::GraphInstance> graphs) {
  SplitRecord r;
  r.protocol = protocol;
  r.held_out_subject = s.held_out_subject;
  r.train = trial_ids(graphs, s.train);
  r.val = trial_ids(graphs, s.val);
  r.test = trial_ids(graphs, s.test);
  return r;
}

std::vector<std::size_t> select(std::span<const pig::GraphInstance> graphs, const std::vector<std::uint64_t>& ids) {
  const std::set<std::uint64_t> want(ids.begin(), ids.end());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < graphs.size(); ++i)
    if (want.count(graphs[i].cycle.trial_id)) out.push_back(i);
  return out;
}

std::string artifact_header(const std::string& kind, const RunConfig& c) {
  return "# gaitvib " + kind + "\n# config_hash " + config_hash(c) + "\n# seed " + std::to_string(c.seed) + "\n";
}

std::string split_csv(const SplitRecord& s, const RunConfig& c) {
  std::ostringstream os;
  os << artifact_header("split", c) << "# protocol " << protocol_name(s.protocol) << "\n# held_out_subject ";
  if (s.protocol == pig::Protocol::LeaveOneSubjectOut) os << s.held_out_subject;
  else os << '-';
  os << "\ntrial_id,set\n";
  std::vector<std::pair<std::uint64_t, const char*>> rows;
  for (auto id : s.train) rows.emplace_back(id, "train");
  for (auto id : s.val) rows.emplace_back(id, "val");
  for (auto id : s.test) rows.emplace_back(id, "test");
  std::sort(rows.begin(), rows.end());
  for (const auto& [id, set] : rows) os << id << ',' << set << '\n';
  return os.str();
}

SplitRecord parse_split_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  std::map<std::string, std::string> meta;
  SplitRecord r;
  std::size_t n = 0;
  bool header = false;
  while (std::getline(is, line)) {
    ++n;
    const std::string where = "split line " + std::to_string(n) + ": ";
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto sp = line.find(' ', 2);
      if (sp != std::string::npos) meta[line.substr(2, sp - 2)] = line.substr(sp + 1);
      continue;
    }
    if (!header) {
      if (line != "trial_id,set") throw DataError(where + "unexpected header");
      header = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw DataError(where + "expected trial_id,set");
    std::uint64_t id = 0;
    try {
      std::size_t used = 0;
      id = std::stoull(line.substr(0, comma), &used);
      if (used != comma) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw DataError(where + "bad trial id");
    }
    const std::string set = line.substr(comma + 1);
    if (set == "train") r.train.push_back(id);
    else if (set == "val") r.val.push_back(id);
    else if (set == "test") r.test.push_back(id);
    else throw DataError(where + "unknown set '" + set + "'");
  }
  if (!header) throw DataError("split file has no header");
  const auto p = meta.find("protocol");
  if (p == meta.end()) throw DataError("split file does not name its protocol");
  if (p->second == "per_trial") {
    r.protocol = pig::Protocol::PerTrial;
  } else if (p->second == "loso") {
    r.protocol = pig::Protocol::LeaveOneSubjectOut;
    try {
      r.held_out_subject = std::stoull(meta.at("held_out_subject"));
    } catch (const std::exception&) {
      throw DataError("split file lacks a held-out subject");
    }
  } else {
    throw DataError("split file has unknown protocol '" + p->second + "'");
  }
  return r;
}

std::string history_csv(const std::vector<pig::EpochRecord>& h, std::size_t best_epoch, const RunConfig& c) {
  std::ostringstream os;
  os << artifact_header("history", c) << "# best_epoch " << best_epoch << "\n";
  os << "epoch,train_loss,train_mse,val_mae\n";
  for (const auto& e : h) os << e.epoch << ',' << g9(e.train_loss) << ',' << g9(e.train_mse) << ',' << g9(e.val_mae) << '\n';
  return os.str();
}

std::string tuning_csv(const pig::TuneResult& t, const RunConfig& c) {
  std::ostringstream os;
  os << artifact_header("tuning", c) << "# epoch_budget " << c.tuning.epochs << "\n";
  os << "hidden,learning_rate,val_mae\n";
  for (const auto& g : t.grid) os << g.hidden << ',' << g9(g.learning_rate) << ',' << g9(g.val_mae) << '\n';
  return os.str();
}

TrainOutcome train_model(const RunConfig& c, pig::ModelKind kind, std::span<const pig::GraphInstance> graphs,
                         const pig::Split& split, std::ostream* log) {
  TrainOutcome out;
  pig::PigConfig cfg = c.model_config(kind);
  const std::string name(pig::to_string(kind));
  if (c.tuning.enabled) {
    out.tuning = pig::tune(kind, cfg, c.tuning.hidden, c.tuning.learning_rate, graphs, split.train, split.val,
                           c.tuning.epochs);
    cfg = out.tuning->best;
    if (log)
      *log << name << " tuned: hidden " << (kind == pig::ModelKind::Pig ? cfg.hidden_dim : cfg.lstm_hidden)
           << ", learning rate " << g9(cfg.learning_rate) << "\n";
  }
  out.result = pig::train(kind, cfg, graphs, split.train, split.val, [&](const pig::EpochRecord& e) {
    if (log)
      *log << name << " epoch " << e.epoch << " loss " << g9(e.train_loss) << " val_mae " << g9(e.val_mae) << "\n"
           << std::flush;
  });
  return out;
}

TrainArtifacts cmd_train(const CommandOptions& o, std::ostream& log) {
  RunConfig c = resolve_config(o);
  if (o.split) {
    if (*o.split == "loso") c.protocol = pig::Protocol::LeaveOneSubjectOut;
    else if (*o.split == "train" || *o.split == "test") c.protocol = pig::Protocol::PerTrial;
    else throw ConfigError("--split must be train, test or loso");
  }
  const pig::ModelKind kind = o.model.value_or(pig::ModelKind::Pig);
  const std::string name(pig::to_string(kind));
  const fs::path data(c.dataset.dir);
  const Manifest manifest = read_manifest(data);
  const auto graphs = load_graphs(manifest, data, c.model_config(kind).vib_window);
  const pig::Split split = pig::make_split(graphs, c.protocol, c.seed);
  log << name << ": " << graphs.size() << " cycles, " << split.train.size() << " train / " << split.val.size()
      << " val / " << split.test.size() << " test\n";

  TrainArtifacts a;
  a.outcome = train_model(c, kind, graphs, split, &log);
  const fs::path dir = run_dir(c, o);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) throw DataError("cannot create output directory " + dir.string());
  a.checkpoint = dir / (name + "_checkpoint.txt");
  a.history = dir / (name + "_history.csv");
  a.split = dir / (name + "_split.csv");
  pig::save_checkpoint(a.checkpoint, a.outcome.result.model, {config_hash(c), c.seed});
  write_file(a.history, history_csv(a.outcome.result.history, a.outcome.result.best_epoch, c));
  write_file(a.split, split_csv(record_split(split, c.protocol, graphs), c));
  if (a.outcome.tuning) {
    a.tuning = dir / (name + "_tuning.csv");
    write_file(a.tuning, tuning_csv(*a.outcome.tuning, c));
  }
  log << name << ": best epoch " << a.outcome.result.best_epoch << ", wrote " << a.checkpoint.string() << "\n";
  return a;
}

std::string report_document(const pig::Report& r, const RunConfig& c, pig::ModelKind kind, const std::string& split) {
  return artifact_header("report", c) + "# model " + std::string(pig::to_string(kind)) + "\n# split " + split + "\n" +
         pig::report_csv(r);
}

std::string segment_chart(const std::vector<std::pair<pig::ModelKind, pig::Report>>& results, const RunConfig& c,
                          const std::string& split) {
  std::vector<std::string> categories;
  std::vector<BarSeries> series;
  for (const auto& [kind, report] : results) {
    BarSeries s{kind == pig::ModelKind::Pig ? "PIG" : "LSTM", {}};
    std::vector<std::string> keys;
    for (const auto& row : report.rows)
      if (row.group == "segment") {
        keys.push_back(row.key);
        s.values.push_back(row.mae);
      }
    if (categories.empty()) categories = keys;
    else if (categories != keys) throw DataError("reports disagree on their segments");
    series.push_back(std::move(s));
  }
  return grouped_bar_chart(categories, series, "Per-segment MAE (" + split + " split)", "MAE (deg)",
                           "gaitvib segments; config_hash " + config_hash(c) + "; seed " + std::to_string(c.seed));
}

EvalArtifacts cmd_eval(const CommandOptions& o, std::ostream& log) {
  const RunConfig c = resolve_config(o);
  const std::string split = o.split.value_or("test");
  if (split != "train" && split != "test" && split != "loso")
    throw ConfigError("--split must be train, test or loso");
  const fs::path dir = run_dir(c, o);
  std::vector<pig::ModelKind> kinds;
  if (o.model) kinds.push_back(*o.model);
  else
    for (auto k : {pig::ModelKind::Pig, pig::ModelKind::Lstm})
      if (fs::exists(dir / (std::string(pig::to_string(k)) + "_checkpoint.txt"))) kinds.push_back(k);
  if (kinds.empty()) throw DataError("no checkpoint in " + dir.string());

  const fs::path data(c.dataset.dir);
  const Manifest manifest = read_manifest(data);
  EvalArtifacts a;
  for (auto kind : kinds) {
    const std::string name(pig::to_string(kind));
    const auto ckpt = pig::load_checkpoint(dir / (name + "_checkpoint.txt"));
    if (ckpt.model.kind != kind) throw DataError(name + "_checkpoint.txt holds a " + std::string(pig::to_string(ckpt.model.kind)) + " model");
    if (ckpt.meta.config_hash != config_hash(c))
      log << name << ": checkpoint config_hash " << ckpt.meta.config_hash << " differs from the current config\n";
    const fs::path split_path = dir / (name + "_split.csv");
    SplitRecord rec;
    try {
      rec = parse_split_csv(read_file(split_path));
    } catch (const DataError& e) {
      throw DataError(split_path.string() + ": " + e.what());
    }
    if (split == "loso" && rec.protocol != pig::Protocol::LeaveOneSubjectOut)
      throw DataError(name + " was not trained with the leave-one-subject-out protocol");
    const auto& ids = split == "train" ? rec.train : rec.test;
    if (ids.empty()) throw DataError(name + ": the " + split + " split is empty");

    Manifest subset = manifest;
    const std::set<std::uint64_t> want(ids.begin(), ids.end());
    std::erase_if(subset.trials, [&](const PlannedTrial& t) { return !want.count(t.trial_id); });
    if (subset.trials.size() != want.size()) throw DataError(name + ": split lists trials missing from the manifest");
    const auto graphs = load_graphs(subset, data, ckpt.model.cfg.vib_window);
    std::vector<std::size_t> idx(graphs.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    pig::Report report = pig::evaluate(ckpt.model, graphs, idx);
    const fs::path out = dir / ("report_" + name + "_" + split + ".csv");
    write_file(out, report_document(report, c, kind, split));
    log << name << " " << split << " MAE " << g9(report.at("overall", "all").mae) << " deg over "
        << report.at("overall", "all").cycles << " cycles, wrote " << out.string() << "\n";
    a.reports.push_back(out);
    a.results.emplace_back(kind, std::move(report));
  }
  a.chart = dir / ("segments_" + split + ".svg");
  write_file(a.chart, segment_chart(a.results, c, split));
  return a;
}

}  // namespace gaitvib::app
