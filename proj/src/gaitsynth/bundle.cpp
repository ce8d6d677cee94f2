#include "gaitvib/gaitsynth/bundle.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "gaitvib/core/error.hpp"
#include "gaitvib/core/numfmt.hpp"

namespace gaitvib::gaitsynth {

namespace fs = std::filesystem;

std::string trial_dir_name(std::uint64_t trial_id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "trial_%05llu", static_cast<unsigned long long>(trial_id));
  return buf;
}

namespace {

std::string num(double x) { return format_sig(x, 9); }

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ' ';
    s += num(v[i]);
  }
  return s;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw DataError("cannot write " + p.string());
  return out;
}

void write_csv(const fs::path& p, const std::string& header, std::size_t rows, double rate, double start,
               const std::vector<const std::vector<double>*>& cols,
               const std::vector<const std::vector<bool>*>& flags = {}, std::size_t flag_after = 0) {
  std::ofstream out = open_out(p);
  out << header << '\n';
  std::string line;
  for (std::size_t i = 0; i < rows; ++i) {
    line = num(start + static_cast<double>(i) / rate);
    for (std::size_t c = 0; c < cols.size(); ++c) {
      line += ',';
      line += num((*cols[c])[i]);
      // GRF rows interleave a stance flag after every `flag_after` columns.
      if (flag_after && (c + 1) % flag_after == 0) {
        line += ',';
        line += (*flags[c / flag_after])[i] ? '1' : '0';
      }
    }
    out << line << '\n';
  }
  if (!out) throw DataError("failed writing " + p.string());
}

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<double>> cols;
};

Csv read_csv(const fs::path& p, std::size_t expected_cols) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("missing file " + p.string());
  Csv csv;
  std::string line;
  if (!std::getline(in, line)) throw DataError(p.string() + ": empty file");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) csv.header.push_back(cell);
  }
  if (csv.header.size() != expected_cols)
    throw DataError(p.string() + ": expected " + std::to_string(expected_cols) + " columns, header has " +
                    std::to_string(csv.header.size()));
  csv.cols.resize(expected_cols);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::size_t c = 0, pos = 0;
    while (pos <= line.size()) {
      const std::size_t comma = std::min(line.find(',', pos), line.size());
      if (c >= expected_cols) throw DataError(p.string() + ":" + std::to_string(lineno) + ": too many fields");
      try {
        csv.cols[c].push_back(parse_double(std::string_view(line).substr(pos, comma - pos)));
      } catch (const std::invalid_argument& e) {
        throw DataError(p.string() + ":" + std::to_string(lineno) + ": " + e.what());
      }
      ++c;
      pos = comma + 1;
    }
    if (c != expected_cols)
      throw DataError(p.string() + ":" + std::to_string(lineno) + ": expected " +
                      std::to_string(expected_cols) + " fields, got " + std::to_string(c));
  }
  return csv;
}

std::map<std::string, std::string> read_meta(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("missing file " + p.string());
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw DataError(p.string() + ":" + std::to_string(lineno) + ": expected key=value");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

class Meta {
 public:
  Meta(std::map<std::string, std::string> kv, fs::path p) : kv_(std::move(kv)), path_(std::move(p)) {}

  const std::string& str(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) throw DataError(path_.string() + ": missing key '" + key + "'");
    return it->second;
  }
  double real(const std::string& key) const {
    try {
      return parse_double(str(key));
    } catch (const std::invalid_argument&) {
      throw DataError(path_.string() + ": key '" + key + "' is not a number");
    }
  }
  std::uint64_t integer(const std::string& key) const {
    const std::string& s = str(key);
    std::uint64_t v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
      throw DataError(path_.string() + ": key '" + key + "' is not an unsigned integer");
    return v;
  }
  std::vector<double> list(const std::string& key) const {
    std::vector<double> v;
    std::stringstream ss(str(key));
    std::string tok;
    while (ss >> tok) {
      try {
        v.push_back(parse_double(tok));
      } catch (const std::invalid_argument&) {
        throw DataError(path_.string() + ": key '" + key + "' has a non-numeric entry");
      }
    }
    return v;
  }

 private:
  std::map<std::string, std::string> kv_;
  fs::path path_;
};

std::vector<bool> to_mask(const std::vector<double>& v, const fs::path& p) {
  std::vector<bool> m(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] != 0.0 && v[i] != 1.0) throw DataError(p.string() + ": stance flag must be 0 or 1");
    m[i] = v[i] == 1.0;
  }
  return m;
}

}  // namespace

fs::path save_trial(const TrialRecord& t, const fs::path& root) {
  const fs::path dir = root / trial_dir_name(t.trial_id);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());

  {
    std::ofstream out = open_out(dir / "meta.txt");
    const auto& a = t.anthropometry;
    out << "format_version=" << kBundleFormatVersion << '\n'
        << "trial_id=" << t.trial_id << '\n'
        << "subject_id=" << t.subject_id << '\n'
        << "gait_type=" << to_string(t.gait_type) << '\n'
        << "seed=" << t.seed << '\n'
        << "cadence=" << num(t.cadence) << '\n'
        << "body_mass=" << num(a.body_mass) << '\n'
        << "height=" << num(a.height) << '\n'
        << "thigh_length=" << num(a.thigh_length) << '\n'
        << "shank_length=" << num(a.shank_length) << '\n'
        << "foot_length=" << num(a.foot_length) << '\n'
        << "mocap_rate=" << num(t.left.sample_rate) << '\n'
        << "mocap_start=" << num(t.left.start_time) << '\n'
        << "mocap_samples=" << t.left.size() << '\n'
        << "vib_rate=" << num(t.vibration.sample_rate) << '\n'
        << "vib_start=" << num(t.vibration.start_time) << '\n'
        << "vib_samples=" << t.vibration.samples() << '\n'
        << "sensors=" << t.vibration.sensors() << '\n'
        << "gain=" << num(t.vibration.gain) << '\n'
        << "sensitivity=" << num(t.vibration.sensitivity) << '\n'
        << "left_strikes=" << join(t.events.left.foot_strike_times) << '\n'
        << "left_offs=" << join(t.events.left.foot_off_times) << '\n'
        << "right_strikes=" << join(t.events.right.foot_strike_times) << '\n'
        << "right_offs=" << join(t.events.right.foot_off_times) << '\n';
    if (!out) throw DataError("failed writing meta.txt in " + dir.string());
  }
  write_csv(dir / "angles.csv", "t,L_hip,L_knee,L_ankle,R_hip,R_knee,R_ankle", t.left.size(),
            t.left.sample_rate, t.left.start_time,
            {&t.left.hip, &t.left.knee, &t.left.ankle, &t.right.hip, &t.right.knee, &t.right.ankle});
  write_csv(dir / "grf.csv", "t,L_Fv,L_Fap,L_stance,R_Fv,R_Fap,R_stance", t.grf.left.size(),
            t.grf.left.sample_rate, t.grf.left.start_time,
            {&t.grf.left.vertical, &t.grf.left.anterior_posterior, &t.grf.right.vertical,
             &t.grf.right.anterior_posterior},
            {&t.grf.left.stance_mask, &t.grf.right.stance_mask}, 2);
  std::string vib_header = "t";
  std::vector<const std::vector<double>*> vib_cols;
  for (std::size_t s = 0; s < t.vibration.sensors(); ++s) {
    vib_header += ",s" + std::to_string(s + 1);
    vib_cols.push_back(&t.vibration.signals[s]);
  }
  write_csv(dir / "vib.csv", vib_header, t.vibration.samples(), t.vibration.sample_rate,
            t.vibration.start_time, vib_cols);
  return dir;
}

TrialRecord load_trial(const fs::path& dir) {
  const Meta m(read_meta(dir / "meta.txt"), dir / "meta.txt");
  if (m.integer("format_version") != static_cast<std::uint64_t>(kBundleFormatVersion))
    throw DataError((dir / "meta.txt").string() + ": unsupported format_version " + m.str("format_version"));

  TrialRecord t;
  t.trial_id = m.integer("trial_id");
  t.subject_id = m.integer("subject_id");
  try {
    t.gait_type = parse_gait_type(m.str("gait_type"));
  } catch (const std::invalid_argument& e) {
    throw DataError((dir / "meta.txt").string() + ": " + e.what());
  }
  t.seed = m.integer("seed");
  t.cadence = m.real("cadence");
  auto& a = t.anthropometry;
  a.body_mass = m.real("body_mass");
  a.height = m.real("height");
  a.thigh_length = m.real("thigh_length");
  a.shank_length = m.real("shank_length");
  a.foot_length = m.real("foot_length");
  t.events.left.foot_strike_times = m.list("left_strikes");
  t.events.left.foot_off_times = m.list("left_offs");
  t.events.right.foot_strike_times = m.list("right_strikes");
  t.events.right.foot_off_times = m.list("right_offs");

  const double rate = m.real("mocap_rate"), start = m.real("mocap_start");
  const std::size_t n = m.integer("mocap_samples");
  const Csv ang = read_csv(dir / "angles.csv", 7);
  if (ang.cols[0].size() != n) throw DataError((dir / "angles.csv").string() + ": row count differs from meta");
  for (auto* tr : {&t.left, &t.right}) {
    tr->sample_rate = rate;
    tr->start_time = start;
  }
  t.left.hip = ang.cols[1];
  t.left.knee = ang.cols[2];
  t.left.ankle = ang.cols[3];
  t.right.hip = ang.cols[4];
  t.right.knee = ang.cols[5];
  t.right.ankle = ang.cols[6];

  const Csv grf = read_csv(dir / "grf.csv", 7);
  if (grf.cols[0].size() != n) throw DataError((dir / "grf.csv").string() + ": row count differs from meta");
  for (auto* g : {&t.grf.left, &t.grf.right}) {
    g->sample_rate = rate;
    g->start_time = start;
  }
  t.grf.left.vertical = grf.cols[1];
  t.grf.left.anterior_posterior = grf.cols[2];
  t.grf.left.stance_mask = to_mask(grf.cols[3], dir / "grf.csv");
  t.grf.right.vertical = grf.cols[4];
  t.grf.right.anterior_posterior = grf.cols[5];
  t.grf.right.stance_mask = to_mask(grf.cols[6], dir / "grf.csv");

  const std::size_t sensors = m.integer("sensors");
  const Csv vib = read_csv(dir / "vib.csv", sensors + 1);
  if (vib.cols[0].size() != m.integer("vib_samples"))
    throw DataError((dir / "vib.csv").string() + ": row count differs from meta");
  t.vibration.sample_rate = m.real("vib_rate");
  t.vibration.start_time = m.real("vib_start");
  t.vibration.gain = m.real("gain");
  t.vibration.sensitivity = m.real("sensitivity");
  t.vibration.signals.assign(vib.cols.begin() + 1, vib.cols.end());
  return t;
}

}  // namespace gaitvib::gaitsynth
