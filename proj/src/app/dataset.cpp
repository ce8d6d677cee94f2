#include "gaitvib/app/dataset.hpp"

#include <fstream>
#include <sstream>

#include "gaitvib/core/error.hpp"
#include "gaitvib/core/parallel.hpp"
#include "gaitvib/core/rng.hpp"
#include "gaitvib/gaitsynth/bundle.hpp"

namespace gaitvib::app {

namespace fs = std::filesystem;

std::vector<PlannedTrial> plan_trials(const RunConfig& c) {
  std::vector<PlannedTrial> out;
  std::uint64_t id = 0;
  for (std::uint64_t s = 0; s < c.dataset.subjects; ++s)
    for (auto type : c.dataset.gait_types) {
      const std::size_t n =
          type == gaitsynth::GaitType::Normal ? c.dataset.normal_trials : c.dataset.abnormal_trials;
      for (std::size_t k = 0; k < n; ++k, ++id) out.push_back({id, s, type, derive_seed(c.seed, {0x71, id})});
    }
  return out;
}

gaitsynth::TrialOptions trial_options(const RunConfig& c) {
  gaitsynth::TrialOptions o;
  o.n_cycles = c.dataset.cycles_per_trial;
  o.cadence_jitter = c.dataset.cadence_jitter;
  o.variability = c.dataset.variability;
  o.geophone = c.geophone;
  o.padding = c.dataset.padding;
  return o;
}

gaitsynth::TrialRecord synthesize(const RunConfig& c, const PlannedTrial& p) {
  const auto subject = gaitsynth::make_subject(p.subject_id, c.seed);
  return gaitsynth::synth_trial(p.gait_type, subject, p.trial_id, p.seed, c.floor, trial_options(c));
}

std::string manifest_text(const Manifest& m) {
  std::ostringstream os;
  os << "# gaitvib manifest\n# config_hash " << m.config_hash << "\n# seed " << m.seed << "\n";
  os << "trial_id,subject_id,gait_type,seed,dir\n";
  for (const auto& t : m.trials)
    os << t.trial_id << ',' << t.subject_id << ',' << gaitsynth::to_string(t.gait_type) << ',' << t.seed << ','
       << gaitsynth::trial_dir_name(t.trial_id) << '\n';
  return os.str();
}

namespace {

std::uint64_t parse_u64(const std::string& s, std::size_t line) {
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    if (s.empty() || s[0] == '-') throw std::invalid_argument(s);
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty())
    throw DataError("manifest line " + std::to_string(line) + ": bad integer '" + s + "'");
  return v;
}

}  // namespace

Manifest parse_manifest(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  std::size_t n = 0;
  auto next = [&](const char* what) {
    if (!std::getline(is, line)) throw DataError(std::string("manifest ends before ") + what);
    ++n;
  };
  auto expect_prefix = [&](const std::string& prefix) {
    if (!line.starts_with(prefix))
      throw DataError("manifest line " + std::to_string(n) + ": expected '" + prefix + "'");
    return line.substr(prefix.size());
  };
  Manifest m;
  next("the title");
  expect_prefix("# gaitvib manifest");
  next("the config hash");
  m.config_hash = expect_prefix("# config_hash ");
  next("the seed");
  m.seed = parse_u64(expect_prefix("# seed "), n);
  next("the header");
  if (line != "trial_id,subject_id,gait_type,seed,dir")
    throw DataError("manifest line " + std::to_string(n) + ": unexpected header");
  while (std::getline(is, line)) {
    ++n;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    if (f.size() != 5) throw DataError("manifest line " + std::to_string(n) + ": expected 5 fields");
    PlannedTrial t;
    t.trial_id = parse_u64(f[0], n);
    t.subject_id = parse_u64(f[1], n);
    try {
      t.gait_type = gaitsynth::parse_gait_type(f[2]);
    } catch (const std::invalid_argument& e) {
      throw DataError("manifest line " + std::to_string(n) + ": " + e.what());
    }
    t.seed = parse_u64(f[3], n);
    if (f[4] != gaitsynth::trial_dir_name(t.trial_id))
      throw DataError("manifest line " + std::to_string(n) + ": directory does not match trial id");
    m.trials.push_back(t);
  }
  if (m.trials.empty()) throw DataError("manifest lists no trials");
  return m;
}

Manifest read_manifest(const fs::path& dir) {
  const fs::path path = dir / kManifestName;
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("missing manifest " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  try {
    return parse_manifest(ss.str());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

Manifest simulate_dataset(const RunConfig& c, const fs::path& dir) {
  c.validate();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw DataError("cannot create output directory " + dir.string());
  Manifest m{config_hash(c), c.seed, plan_trials(c)};
  parallel_for(m.trials.size(), [&](std::size_t i) {
    try {
      gaitsynth::save_trial(synthesize(c, m.trials[i]), dir);
    } catch (const fs::filesystem_error& e) {
      throw DataError(std::string("cannot write trial bundle: ") + e.what());
    }
  });
  const fs::path path = dir / kManifestName;
  std::ofstream os(path, std::ios::binary);
  os << manifest_text(m);
  if (!os) throw DataError("cannot write " + path.string());
  return m;
}

namespace {

std::vector<pig::GraphInstance> flatten(std::vector<std::vector<pig::GraphInstance>>& per) {
  std::vector<pig::GraphInstance> out;
  for (auto& v : per)
    for (auto& g : v) out.push_back(std::move(g));
  return out;
}

}  // namespace

std::vector<pig::GraphInstance> load_graphs(const Manifest& m, const fs::path& dir, std::size_t vib_window) {
  std::vector<std::vector<pig::GraphInstance>> per(m.trials.size());
  parallel_for(m.trials.size(), [&](std::size_t i) {
    const auto trial = gaitsynth::load_trial(dir / gaitsynth::trial_dir_name(m.trials[i].trial_id));
    if (trial.subject_id != m.trials[i].subject_id || trial.gait_type != m.trials[i].gait_type ||
        trial.seed != m.trials[i].seed)
      throw DataError("bundle " + gaitsynth::trial_dir_name(m.trials[i].trial_id) + " does not match the manifest");
    per[i] = pig::build_graphs(trial, vib_window);
  });
  return flatten(per);
}

std::vector<pig::GraphInstance> synthesize_graphs(const RunConfig& c, std::size_t vib_window) {
  c.validate();
  const auto plan = plan_trials(c);
  std::vector<std::vector<pig::GraphInstance>> per(plan.size());
  parallel_for(plan.size(), [&](std::size_t i) { per[i] = pig::build_graphs(synthesize(c, plan[i]), vib_window); });
  return flatten(per);
}

}  // namespace gaitvib::app
