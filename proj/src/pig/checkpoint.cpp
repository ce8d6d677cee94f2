#include "gaitvib/pig/checkpoint.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>
#include <vector>

#include "gaitvib/core/error.hpp"
#include "gaitvib/core/numfmt.hpp"

namespace gaitvib::pig {

namespace {

constexpr std::string_view kMagic = "gaitvib-checkpoint";

std::string num17(double v) { return format_sig(v, 17); }

template <class F>
void for_each_config_field(F&& f, const PigConfig& c) {
  f("hidden_dim", std::to_string(c.hidden_dim));
  f("attention_heads", std::to_string(c.attention_heads));
  f("lstm_hidden", std::to_string(c.lstm_hidden));
  f("message_rounds", std::to_string(c.message_rounds));
  f("vib_window", std::to_string(c.vib_window));
  f("frame_length", std::to_string(c.frame_length));
  f("learning_rate", num17(c.learning_rate));
  f("lambda", num17(c.lambda));
  f("epochs", std::to_string(c.epochs));
  f("batch_size", std::to_string(c.batch_size));
  f("patience", std::to_string(c.patience));
  f("seed", std::to_string(c.seed));
}

class Reader {
 public:
  explicit Reader(std::istream& is) : is_(is) {}

  // Next line split on spaces; the first word must be `key`.
  std::vector<std::string> expect(std::string_view key) {
    std::string line;
    if (!std::getline(is_, line)) fail("unexpected end of file, wanted '" + std::string(key) + "'");
    ++line_no_;
    std::istringstream ls(line);
    std::vector<std::string> words;
    for (std::string w; ls >> w;) words.push_back(w);
    if (words.empty() || words.front() != key) fail("expected '" + std::string(key) + "'");
    words.erase(words.begin());
    return words;
  }
  std::string raw() {
    std::string line;
    if (!std::getline(is_, line)) fail("unexpected end of file");
    ++line_no_;
    return line;
  }
  std::string one(std::string_view key) {
    auto w = expect(key);
    if (w.size() != 1) fail("'" + std::string(key) + "' takes one value");
    return w.front();
  }
  std::uint64_t u64(std::string_view key) { return to_u64(one(key)); }
  double real(const std::string& s) {
    try {
      return parse_double(s);
    } catch (const std::invalid_argument&) {
      fail("bad number '" + s + "'");
    }
  }
  std::uint64_t to_u64(const std::string& s) {
    std::uint64_t v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) fail("bad integer '" + s + "'");
    return v;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw DataError("checkpoint line " + std::to_string(line_no_) + ": " + what);
  }

 private:
  std::istream& is_;
  std::size_t line_no_ = 0;
};

}  // namespace

void write_checkpoint(std::ostream& os, const Model& m, const CheckpointMeta& meta) {
  os << kMagic << ' ' << kCheckpointVersion << '\n';
  os << "model " << to_string(m.kind) << '\n';
  os << "config_hash " << (meta.config_hash.empty() ? "-" : meta.config_hash) << '\n';
  os << "global_seed " << meta.seed << '\n';
  for_each_config_field([&](const char* k, const std::string& v) { os << "config." << k << ' ' << v << '\n'; },
                        m.cfg);
  os << "normalizer.target_mean";
  for (double v : m.norm.target_mean) os << ' ' << num17(v);
  os << "\nnormalizer.target_std";
  for (double v : m.norm.target_std) os << ' ' << num17(v);
  os << "\nnormalizer.vib_scale " << num17(m.norm.vib_scale) << '\n';
  os << "param_seed " << m.params.rng_seed() << '\n';
  const auto names = m.params.names_by_offset();
  os << "slices " << names.size() << '\n';
  for (const auto& n : names) {
    const auto& s = m.params.slice(n);
    os << "slice " << n << ' ' << s.offset << ' ' << s.shape.rows << ' ' << s.shape.cols << '\n';
  }
  os << "values " << m.params.size() << '\n';
  for (double v : m.params.values()) os << num17(v) << '\n';
  os << "end\n";
}

void save_checkpoint(const std::filesystem::path& path, const Model& m, const CheckpointMeta& meta) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write checkpoint " + path.string());
  write_checkpoint(os, m, meta);
  if (!os) throw DataError("failed writing checkpoint " + path.string());
}

LoadedCheckpoint read_checkpoint(std::istream& is) {
  Reader r(is);
  LoadedCheckpoint out;
  const auto head = r.expect(kMagic);
  if (head.size() != 1 || r.to_u64(head[0]) != static_cast<std::uint64_t>(kCheckpointVersion))
    throw ConfigError("checkpoint format version " + (head.empty() ? std::string("?") : head[0]) +
                      " is not supported (expected " + std::to_string(kCheckpointVersion) + ")");
  try {
    out.model.kind = parse_model_kind(r.one("model"));
  } catch (const ConfigError& e) {
    r.fail(e.what());
  }
  out.meta.config_hash = r.one("config_hash");
  if (out.meta.config_hash == "-") out.meta.config_hash.clear();
  out.meta.seed = r.u64("global_seed");

  PigConfig& c = out.model.cfg;
  auto size = [&](const char* k) { return static_cast<std::size_t>(r.u64(std::string("config.") + k)); };
  c.hidden_dim = size("hidden_dim");
  c.attention_heads = size("attention_heads");
  c.lstm_hidden = size("lstm_hidden");
  c.message_rounds = size("message_rounds");
  c.vib_window = size("vib_window");
  c.frame_length = size("frame_length");
  c.learning_rate = r.real(r.one("config.learning_rate"));
  c.lambda = r.real(r.one("config.lambda"));
  c.epochs = size("epochs");
  c.batch_size = size("batch_size");
  c.patience = size("patience");
  c.seed = r.u64("config.seed");
  c.validate();

  auto twelve = [&](const char* key, std::array<double, gaitsynth::kTargetCount>& dst) {
    const auto w = r.expect(key);
    if (w.size() != dst.size()) r.fail(std::string(key) + " needs 12 values");
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = r.real(w[i]);
  };
  twelve("normalizer.target_mean", out.model.norm.target_mean);
  twelve("normalizer.target_std", out.model.norm.target_std);
  out.model.norm.vib_scale = r.real(r.one("normalizer.vib_scale"));

  num::ParamStore params(r.u64("param_seed"));
  const std::uint64_t n_slices = r.u64("slices");
  for (std::uint64_t i = 0; i < n_slices; ++i) {
    const auto w = r.expect("slice");
    if (w.size() != 4) r.fail("slice needs name offset rows cols");
    const std::uint64_t offset = r.to_u64(w[1]);
    if (offset != params.size()) r.fail("slice " + w[0] + " is not contiguous");
    params.add(w[0], {static_cast<std::size_t>(r.to_u64(w[2])), static_cast<std::size_t>(r.to_u64(w[3]))},
               num::Init::Zeros);
  }
  const std::uint64_t n_values = r.u64("values");
  if (n_values != params.size()) r.fail("value count does not match the slice table");
  for (auto& v : params.values()) v = r.real(r.raw());
  r.expect("end");

  std::size_t sensors = 4;
  if (out.model.kind == ModelKind::Lstm && params.contains("lstm.cell.Wx"))
    sensors = params.slice("lstm.cell.Wx").shape.cols / out.model.cfg.frame_length;
  const Model fresh = init_model(out.model.kind, out.model.cfg, {}, std::max<std::size_t>(sensors, 1));
  if (!fresh.params.layout_equal(params))
    throw ConfigError("checkpoint parameter layout does not match a " + std::string(to_string(out.model.kind)) +
                      " model with this config");
  out.model.params = std::move(params);
  return out;
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open checkpoint " + path.string());
  try {
    return read_checkpoint(is);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace gaitvib::pig
