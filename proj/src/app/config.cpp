#include "gaitvib/app/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "gaitvib/core/error.hpp"
#include "json.hpp"

namespace gaitvib::app {

using json = nlohmann::ordered_json;

RunConfig::RunConfig() { lstm.lambda = 0.0; }

namespace {

// Walks one JSON object, remembering which keys were consumed so that
// leftovers can be reported by their full dotted name.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError("config key '" + display() + "' must be an object");
  }

  bool has(const char* key) const { return j_.contains(key); }

  template <class T>
  void get(const char* key, T& out) {
    if (!j_.contains(key)) return;
    used_.insert(key);
    out = convert<T>(j_.at(key), name(key));
  }

  Section sub(const char* key) {
    used_.insert(key);
    return Section(j_.contains(key) ? j_.at(key) : empty(), name(key));
  }

  const json& raw(const char* key) {
    used_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!used_.count(k)) throw ConfigError("unknown config key '" + name(k.c_str()) + "'");
  }

  std::string name(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  static const json& empty() {
    static const json e = json::object();
    return e;
  }
  std::string display() const { return path_.empty() ? "<root>" : path_; }

  template <class T>
  static T convert(const json& v, const std::string& key) {
    auto bad = [&](const char* what) { return ConfigError("config key '" + key + "' must be " + what); };
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw bad("true or false");
      return v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw bad("a string");
      return v.get<std::string>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw bad("a number");
      return v.get<double>();
    } else if constexpr (std::is_integral_v<T> && std::is_unsigned_v<T>) {
      if (!v.is_number_unsigned()) throw bad("a non-negative integer");
      return static_cast<T>(v.get<std::uint64_t>());
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw bad("an integer");
      return static_cast<T>(v.get<std::int64_t>());
    } else {
      if (!v.is_array()) throw bad("an array");
      T out;
      for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(convert<typename T::value_type>(v[i], key + "[" + std::to_string(i) + "]"));
      return out;
    }
  }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

json model_json(const pig::PigConfig& c, bool graph) {
  json j;
  if (graph) {
    j["hidden_dim"] = c.hidden_dim;
    j["attention_heads"] = c.attention_heads;
  }
  j["lstm_hidden"] = c.lstm_hidden;
  if (graph) j["message_rounds"] = c.message_rounds;
  j["vib_window"] = c.vib_window;
  j["frame_length"] = c.frame_length;
  j["learning_rate"] = c.learning_rate;
  if (graph) j["lambda"] = c.lambda;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["patience"] = c.patience;
  return j;
}

void read_model(Section s, pig::PigConfig& c, bool graph) {
  if (graph) {
    s.get("hidden_dim", c.hidden_dim);
    s.get("attention_heads", c.attention_heads);
    s.get("message_rounds", c.message_rounds);
    s.get("lambda", c.lambda);
  }
  s.get("lstm_hidden", c.lstm_hidden);
  s.get("vib_window", c.vib_window);
  s.get("frame_length", c.frame_length);
  s.get("learning_rate", c.learning_rate);
  s.get("epochs", c.epochs);
  s.get("batch_size", c.batch_size);
  s.get("patience", c.patience);
  s.finish();
}

std::string protocol_name(pig::Protocol p) { return p == pig::Protocol::PerTrial ? "per_trial" : "loso"; }

}  // namespace

void RunConfig::validate() const {
  if (dataset.subjects == 0) throw ConfigError("config key 'dataset.subjects' must be positive");
  if (dataset.gait_types.empty()) throw ConfigError("config key 'dataset.gait_types' must not be empty");
  if (dataset.cycles_per_trial < 1) throw ConfigError("config key 'dataset.cycles_per_trial' must be positive");
  if (!(dataset.padding > 0.0)) throw ConfigError("config key 'dataset.padding' must be positive");
  if (!(dataset.cadence_jitter >= 0.0)) throw ConfigError("config key 'dataset.cadence_jitter' must be non-negative");
  std::size_t per_subject = 0;
  for (auto t : dataset.gait_types)
    per_subject += t == gaitsynth::GaitType::Normal ? dataset.normal_trials : dataset.abnormal_trials;
  if (per_subject == 0) throw ConfigError("config key 'dataset' plans no trials");
  try {
    floor.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config section 'floor': ") + e.what());
  }
  if (!(geophone.corner_frequency > 0.0 && geophone.corner_frequency < floor.sample_rate / 2.0))
    throw ConfigError("config key 'geophone.corner_frequency' must lie in (0, sample_rate / 2)");
  if (!(geophone.sensitivity > 0.0) || !(geophone.gain > 0.0))
    throw ConfigError("config keys 'geophone.sensitivity' and 'geophone.gain' must be positive");
  pig.validate();
  try {
    lstm.validate();
  } catch (const ConfigError& e) {
    std::string m = e.what();
    if (m.starts_with("pig.")) m.replace(0, 4, "lstm.");
    throw ConfigError(m);
  }
  if (tuning.hidden.empty() || tuning.learning_rate.empty())
    throw ConfigError("config key 'tuning' needs at least one hidden size and learning rate");
  if (tuning.epochs == 0) throw ConfigError("config key 'tuning.epochs' must be positive");
}

pig::PigConfig RunConfig::model_config(pig::ModelKind kind) const {
  pig::PigConfig c = kind == pig::ModelKind::Pig ? pig : lstm;
  c.seed = seed;
  return c;
}

std::string to_text(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  json d;
  d["dir"] = c.dataset.dir;
  d["subjects"] = c.dataset.subjects;
  d["normal_trials"] = c.dataset.normal_trials;
  d["abnormal_trials"] = c.dataset.abnormal_trials;
  d["gait_types"] = json::array();
  for (auto t : c.dataset.gait_types) d["gait_types"].push_back(std::string(gaitsynth::to_string(t)));
  d["cycles_per_trial"] = c.dataset.cycles_per_trial;
  d["padding"] = c.dataset.padding;
  d["cadence_jitter"] = c.dataset.cadence_jitter;
  const auto& v = c.dataset.variability;
  d["variability"] = {{"subject_offset", v.subject_offset}, {"subject_scale", v.subject_scale},
                      {"trial_offset", v.trial_offset},     {"trial_harmonic", v.trial_harmonic},
                      {"stance_jitter", v.stance_jitter},   {"abnormal_factor", v.abnormal_factor}};
  j["dataset"] = d;
  json f;
  f["modes"] = json::array();
  for (const auto& m : c.floor.modes)
    f["modes"].push_back({{"modal_mass", m.modal_mass},
                          {"damping_ratio", m.damping_ratio},
                          {"natural_frequency", m.natural_frequency}});
  f["attenuation_alpha"] = c.floor.attenuation_alpha;
  f["wave_speed"] = c.floor.wave_speed;
  f["sensors"] = json::array();
  for (const auto& p : c.floor.sensor_positions) f["sensors"].push_back({p.x, p.y});
  f["noise_std"] = c.floor.noise_std;
  f["sample_rate"] = c.floor.sample_rate;
  j["floor"] = f;
  j["geophone"] = {{"sensitivity", c.geophone.sensitivity},
                   {"gain", c.geophone.gain},
                   {"corner_frequency", c.geophone.corner_frequency}};
  j["pig"] = model_json(c.pig, true);
  j["lstm"] = model_json(c.lstm, false);
  j["protocol"] = protocol_name(c.protocol);
  j["tuning"] = {{"enabled", c.tuning.enabled},
                 {"epochs", c.tuning.epochs},
                 {"hidden", c.tuning.hidden},
                 {"learning_rate", c.tuning.learning_rate}};
  return j.dump(2) + "\n";
}

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  Section root(j, "");
  root.get("seed", c.seed);
  root.get("output_dir", c.output_dir);
  {
    Section d = root.sub("dataset");
    d.get("dir", c.dataset.dir);
    d.get("subjects", c.dataset.subjects);
    d.get("normal_trials", c.dataset.normal_trials);
    d.get("abnormal_trials", c.dataset.abnormal_trials);
    if (d.has("gait_types")) {
      std::vector<std::string> names;
      d.get("gait_types", names);
      c.dataset.gait_types.clear();
      for (const auto& n : names) {
        try {
          c.dataset.gait_types.push_back(gaitsynth::parse_gait_type(n));
        } catch (const std::invalid_argument&) {
          throw ConfigError("config key 'dataset.gait_types' has unknown gait type '" + n + "'");
        }
      }
    }
    d.get("cycles_per_trial", c.dataset.cycles_per_trial);
    d.get("padding", c.dataset.padding);
    d.get("cadence_jitter", c.dataset.cadence_jitter);
    Section v = d.sub("variability");
    auto& var = c.dataset.variability;
    v.get("subject_offset", var.subject_offset);
    v.get("subject_scale", var.subject_scale);
    v.get("trial_offset", var.trial_offset);
    v.get("trial_harmonic", var.trial_harmonic);
    v.get("stance_jitter", var.stance_jitter);
    v.get("abnormal_factor", var.abnormal_factor);
    v.finish();
    d.finish();
  }
  {
    Section f = root.sub("floor");
    if (f.has("modes")) {
      const json& modes = f.raw("modes");
      if (!modes.is_array()) throw ConfigError("config key 'floor.modes' must be an array");
      c.floor.modes.clear();
      for (std::size_t i = 0; i < modes.size(); ++i) {
        Section m(modes[i], "floor.modes[" + std::to_string(i) + "]");
        num::ModalOscillator osc;
        m.get("modal_mass", osc.modal_mass);
        m.get("damping_ratio", osc.damping_ratio);
        m.get("natural_frequency", osc.natural_frequency);
        m.finish();
        c.floor.modes.push_back(osc);
      }
    }
    f.get("attenuation_alpha", c.floor.attenuation_alpha);
    f.get("wave_speed", c.floor.wave_speed);
    if (f.has("sensors")) {
      std::vector<std::vector<double>> pts;
      f.get("sensors", pts);
      c.floor.sensor_positions.clear();
      for (const auto& p : pts) {
        if (p.size() != 2) throw ConfigError("config key 'floor.sensors' needs [x, y] pairs");
        c.floor.sensor_positions.push_back({p[0], p[1]});
      }
    }
    f.get("noise_std", c.floor.noise_std);
    f.get("sample_rate", c.floor.sample_rate);
    f.finish();
  }
  {
    Section g = root.sub("geophone");
    g.get("sensitivity", c.geophone.sensitivity);
    g.get("gain", c.geophone.gain);
    g.get("corner_frequency", c.geophone.corner_frequency);
    g.finish();
  }
  read_model(root.sub("pig"), c.pig, true);
  read_model(root.sub("lstm"), c.lstm, false);
  if (root.has("protocol")) {
    std::string p;
    root.get("protocol", p);
    if (p == "per_trial") c.protocol = pig::Protocol::PerTrial;
    else if (p == "loso") c.protocol = pig::Protocol::LeaveOneSubjectOut;
    else throw ConfigError("config key 'protocol' must be per_trial or loso");
  }
  {
    Section t = root.sub("tuning");
    t.get("enabled", c.tuning.enabled);
    t.get("epochs", c.tuning.epochs);
    t.get("hidden", c.tuning.hidden);
    t.get("learning_rate", c.tuning.learning_rate);
    t.finish();
  }
  root.finish();
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

std::uint64_t fnv1a(const std::string& bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const RunConfig& c) {
  RunConfig located = c;
  located.dataset.dir.clear();
  located.output_dir.clear();
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(to_text(located))));
  return buf;
}

}  // namespace gaitvib::app
