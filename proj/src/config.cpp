#include "glassasr/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "glassasr/beamform.hpp"
#include "glassasr/error.hpp"

namespace glassasr {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

// Typed access to one JSON object that remembers which keys were consumed.
class Section {
 public:
  Section(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
    if (!j_.is_object()) throw ConfigError(prefix_.empty() ? "<root>" : prefix_, "expected an object");
  }

  std::string key(std::string_view name) const { return prefix_.empty() ? std::string(name) : prefix_ + "." + std::string(name); }

  const json* find(std::string_view name) {
    seen_.insert(std::string(name));
    auto it = j_.find(std::string(name));
    return it == j_.end() ? nullptr : &*it;
  }

  template <typename T>
  void get(std::string_view name, T& out) {
    const json* v = find(name);
    if (!v) return;
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v->is_boolean()) throw std::invalid_argument("expected true or false");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v->is_number_integer()) throw std::invalid_argument("expected an integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (v->is_number_integer() && v->get<long long>() < 0 && !v->is_number_unsigned()) {
            throw std::invalid_argument("must be non-negative");
          }
        }
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v->is_number()) throw std::invalid_argument("expected a number");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v->is_string()) throw std::invalid_argument("expected a string");
      }
      out = v->get<T>();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(key(name), e.what());
    } catch (const json::exception& e) {
      throw ConfigError(key(name), e.what());
    }
  }

  Section child(std::string_view name) {
    const json* v = find(name);
    static const json kEmpty = json::object();
    return Section(v ? *v : kEmpty, key(name));
  }

  void reject_unknown() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.contains(it.key())) throw ConfigError(key(it.key()), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string prefix_;
  std::set<std::string> seen_;
};

std::vector<double> number_list(Section& s, std::string_view name, std::vector<double> fallback) {
  const json* v = s.find(name);
  if (!v) return fallback;
  if (!v->is_array()) throw ConfigError(s.key(name), "expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : *v) {
    if (!e.is_number()) throw ConfigError(s.key(name), "expected an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

fs::path existing_file(const std::string& key, const std::string& value, const fs::path& base) {
  fs::path p(value);
  if (p.is_relative() && !base.empty()) p = base / p;
  if (!fs::exists(p)) throw ConfigError(key, "file not found: " + p.string());
  return p;
}

std::vector<fs::path> path_list(Section& s, std::string_view name, const fs::path& base) {
  const json* v = s.find(name);
  std::vector<fs::path> out;
  if (!v) return out;
  if (v->is_string()) {
    out.push_back(existing_file(s.key(name), v->get<std::string>(), base));
    return out;
  }
  if (!v->is_array()) throw ConfigError(s.key(name), "expected a path or an array of paths");
  for (const auto& e : *v) {
    if (!e.is_string()) throw ConfigError(s.key(name), "expected a path or an array of paths");
    out.push_back(existing_file(s.key(name), e.get<std::string>(), base));
  }
  return out;
}

std::optional<fs::path> optional_path(Section& s, std::string_view name, const fs::path& base) {
  std::string value;
  s.get(name, value);
  if (value.empty()) return std::nullopt;
  return existing_file(s.key(name), value, base);
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError(key, what);
}

void read_simulation(Section s, PipelineConfig& c, const fs::path& base) {
  auto& sim = c.simulation;
  const auto range = number_list(s, "overlap_range", {sim.sim.overlap_lo, sim.sim.overlap_hi});
  require(range.size() == 2, s.key("overlap_range"), "expected [lo, hi]");
  require(range[0] >= 0.0 && range[1] >= range[0] && range[1] < 1.0, s.key("overlap_range"),
          "must satisfy 0 <= lo <= hi < 1");
  sim.sim.overlap_lo = range[0];
  sim.sim.overlap_hi = range[1];

  if (const json* v = s.find("snr_choices")) {
    const std::string key = s.key("snr_choices");
    require(v->is_array() && !v->empty(), key, "expected a non-empty array of {snr_db, weight}");
    sim.sim.snr_choices.clear();
    for (std::size_t i = 0; i < v->size(); ++i) {
      Section e((*v)[i], key + "[" + std::to_string(i) + "]");
      SnrChoice choice;
      e.get("snr_db", choice.snr_db);
      e.get("weight", choice.weight);
      require(e.find("snr_db") != nullptr, e.key("snr_db"), "required");
      require(std::isfinite(choice.snr_db), e.key("snr_db"), "must be finite");
      require(choice.weight > 0.0 && std::isfinite(choice.weight), e.key("weight"), "must be positive");
      e.reject_unknown();
      sim.sim.snr_choices.push_back(choice);
    }
  }
  s.get("output_rate", sim.sim.output_rate);
  require(sim.sim.output_rate > 0, s.key("output_rate"), "must be positive");
  s.get("rttm_merge_gap", sim.sim.rttm_merge_gap);
  require(sim.sim.rttm_merge_gap >= 0.0, s.key("rttm_merge_gap"), "must be non-negative");
  sim.speed_factors = number_list(s, "speed_factors", sim.speed_factors);
  for (double f : sim.speed_factors) require(f > 0.0, s.key("speed_factors"), "factors must be positive");
  sim.corpus = optional_path(s, "corpus", base);
  sim.rir_bank = path_list(s, "rir_bank", base);
  sim.noise = path_list(s, "noise", base);
  s.reject_unknown();
}

void read_beamformer(Section s, PipelineConfig& c, const fs::path& base) {
  auto& b = c.beamformer;
  b.bank = optional_path(s, "bank", base);
  s.get("horizontal_directions", b.horizontal_directions);
  require(b.horizontal_directions >= 1, s.key("horizontal_directions"), "must be >= 1");
  s.get("taps", b.taps);
  require(b.taps >= 1, s.key("taps"), "must be >= 1");
  s.reject_unknown();
}

void read_mel(Section s, PipelineConfig& c) {
  auto& m = c.mel;
  double length_ms = m.frame_length * 1000.0, hop_ms = m.frame_hop * 1000.0;
  s.get("bins", m.mel_bins);
  s.get("frame_length_ms", length_ms);
  s.get("hop_ms", hop_ms);
  s.get("floor", m.floor);
  s.get("low_hz", m.low_freq);
  s.get("high_hz", m.high_freq);
  require(m.mel_bins >= 1, s.key("bins"), "must be >= 1");
  require(length_ms > 0.0, s.key("frame_length_ms"), "must be positive");
  require(hop_ms > 0.0, s.key("hop_ms"), "must be positive");
  require(m.floor > 0.0, s.key("floor"), "must be positive");
  require(m.low_freq >= 0.0, s.key("low_hz"), "must be non-negative");
  require(m.high_freq <= 0.0 || m.high_freq > m.low_freq, s.key("high_hz"), "must exceed low_hz");
  m.frame_length = length_ms / 1000.0;
  m.frame_hop = hop_ms / 1000.0;
  s.reject_unknown();
}

void read_encoder(Section s, PipelineConfig& c) {
  auto& e = c.encoder;
  s.get("layers", e.layers);
  s.get("hidden", e.hidden);
  s.get("heads", e.heads);
  s.get("conv_kernel", e.conv_kernel);
  s.get("downsample_factor", e.downsample_factor);
  s.get("subsampling_kernel", e.subsampling_kernel);
  s.get("chunk_size", e.chunk_size);
  s.get("ff_mult", e.ff_mult);
  if (const json* v = s.find("att_context")) {
    const std::string key = s.key("att_context");
    require(v->is_array() && v->size() == 2 && (*v)[0].is_number_unsigned() && (*v)[1].is_number_unsigned(), key,
            "expected [left_tokens, right_chunks] as non-negative integers");
    e.att_context.left_tokens = (*v)[0].get<std::size_t>();
    e.att_context.right_chunks = (*v)[1].get<std::size_t>();
  }
  require(e.hidden >= 1, s.key("hidden"), "must be >= 1");
  require(e.heads >= 1 && e.hidden % e.heads == 0, s.key("heads"), "must divide hidden");
  require(e.conv_kernel >= 1, s.key("conv_kernel"), "must be >= 1");
  require(e.downsample_factor >= 1 && (e.downsample_factor & (e.downsample_factor - 1)) == 0,
          s.key("downsample_factor"), "must be a power of two");
  require(e.downsample_factor == 1 || e.subsampling_kernel >= 2, s.key("subsampling_kernel"), "must be >= 2");
  require(e.chunk_size >= 1, s.key("chunk_size"), "must be >= 1");
  require(e.ff_mult >= 1, s.key("ff_mult"), "must be >= 1");
  s.reject_unknown();
}

void read_decoder(Section s, PipelineConfig& c) {
  auto& d = c.decoder;
  s.get("vocab_size", d.vocab_size);
  s.get("embedding", d.embedding);
  s.get("pred_hidden", d.pred_hidden);
  s.get("joint_hidden", d.joint_hidden);
  s.get("max_symbols_per_frame", d.max_symbols_per_frame);
  require(d.vocab_size >= 3, s.key("vocab_size"), "must be >= 3");
  require(d.embedding >= 1, s.key("embedding"), "must be >= 1");
  require(d.pred_hidden >= 1, s.key("pred_hidden"), "must be >= 1");
  require(d.joint_hidden >= 1, s.key("joint_hidden"), "must be >= 1");
  require(d.max_symbols_per_frame >= 1, s.key("max_symbols_per_frame"), "must be >= 1");
  s.reject_unknown();
}

void read_imu(Section s, PipelineConfig& c) {
  auto& m = c.imu;
  std::string mode(imu_mode_name(m.mode));
  s.get("mode", mode);
  try {
    m.mode = parse_imu_mode(mode);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(s.key("mode"), e.what());
  }
  s.get("filter", m.filter);
  s.get("cutoff_hz", m.cutoff_hz);
  s.get("rate", m.sample_rate);
  s.get("width", m.encoder.width);
  s.get("kernel", m.encoder.kernel);
  require(m.sample_rate > 0.0, s.key("rate"), "must be positive");
  require(m.cutoff_hz > 0.0 && m.cutoff_hz < m.sample_rate / 2.0, s.key("cutoff_hz"), "must lie in (0, rate / 2)");
  require(m.encoder.width >= 1, s.key("width"), "must be >= 1");
  require(m.encoder.kernel >= 1, s.key("kernel"), "must be >= 1");
  if (s.find("strides")) {
    std::vector<double> fallback;
    const auto raw = number_list(s, "strides", fallback);
    m.encoder.strides.clear();
    for (double v : raw) {
      require(v >= 1.0 && v == std::floor(v), s.key("strides"), "strides must be positive integers");
      m.encoder.strides.push_back(std::size_t(v));
    }
  }
  s.reject_unknown();
}

void read_eval(Section s, PipelineConfig& c) {
  s.get("attribution_cost", c.eval.attribution_cost);
  s.get("normalize", c.eval.normalize);
  require(c.eval.attribution_cost >= 0.0, s.key("attribution_cost"), "must be non-negative");
  s.reject_unknown();
}

void check_derived(const PipelineConfig& c) {
  if (c.imu.mode == ImuMode::off) return;
  try {
    c.imu.encoder.validate(c.imu.sample_rate);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("imu.strides", e.what());
  }
}

}  // namespace

std::size_t PipelineConfig::beam_count() const {
  if (beamformer.bank) return load_beamformer_bank(*beamformer.bank).directions;
  return beamformer.horizontal_directions + 1;
}

void PipelineConfig::derive() {
  encoder.input_dim = beam_count() * mel.mel_bins;
  imu.encoder.input_axes = imu.mode == ImuMode::all ? 6 : 3;
  imu.encoder.frame_rate = 1.0 / token_duration();
  encoder.aux_dim = imu.mode == ImuMode::off ? 0 : imu.encoder.width;
  decoder.encoder_dim = encoder.hidden;
}

std::size_t PipelineConfig::resolved_workers() const {
  if (workers > 0) return workers;
  return std::max(1u, std::thread::hardware_concurrency());
}

PipelineConfig default_config() {
  PipelineConfig c;
  c.derive();
  return c;
}

PipelineConfig parse_config_text(std::string_view text, const fs::path& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("config is not valid JSON: ") + e.what());
  }
  PipelineConfig c;
  Section s(root, "");
  s.get("seed", c.seed);
  s.get("workers", c.workers);
  read_simulation(s.child("simulation"), c, base_dir);
  read_beamformer(s.child("beamformer"), c, base_dir);
  read_mel(s.child("mel"), c);
  read_encoder(s.child("encoder"), c);
  read_decoder(s.child("decoder"), c);
  read_imu(s.child("imu"), c);
  read_eval(s.child("eval"), c);
  s.reject_unknown();
  try {
    c.derive();
  } catch (const DataError& e) {
    throw ConfigError("beamformer.bank", e.what());
  }
  check_derived(c);
  return c;
}

PipelineConfig parse_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read config file: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  PipelineConfig c = parse_config_text(buf.str(), path.parent_path());
  c.source = path;
  return c;
}

std::string config_to_json(const PipelineConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  auto paths = [](const std::vector<fs::path>& v) {
    json a = json::array();
    for (const auto& p : v) a.push_back(p.string());
    return a;
  };
  json snr = json::array();
  for (const auto& s : c.simulation.sim.snr_choices) snr.push_back({{"snr_db", s.snr_db}, {"weight", s.weight}});
  j["simulation"] = {{"overlap_range", {c.simulation.sim.overlap_lo, c.simulation.sim.overlap_hi}},
                     {"snr_choices", snr},
                     {"output_rate", c.simulation.sim.output_rate},
                     {"rttm_merge_gap", c.simulation.sim.rttm_merge_gap},
                     {"speed_factors", c.simulation.speed_factors},
                     {"corpus", c.simulation.corpus ? c.simulation.corpus->string() : ""},
                     {"rir_bank", paths(c.simulation.rir_bank)},
                     {"noise", paths(c.simulation.noise)}};
  j["beamformer"] = {{"bank", c.beamformer.bank ? c.beamformer.bank->string() : ""},
                     {"horizontal_directions", c.beamformer.horizontal_directions},
                     {"taps", c.beamformer.taps}};
  j["mel"] = {{"bins", c.mel.mel_bins},
              {"frame_length_ms", c.mel.frame_length * 1000.0},
              {"hop_ms", c.mel.frame_hop * 1000.0},
              {"floor", c.mel.floor},
              {"low_hz", c.mel.low_freq},
              {"high_hz", c.mel.high_freq}};
  const auto& e = c.encoder;
  j["encoder"] = {{"layers", e.layers},
                  {"hidden", e.hidden},
                  {"heads", e.heads},
                  {"conv_kernel", e.conv_kernel},
                  {"downsample_factor", e.downsample_factor},
                  {"subsampling_kernel", e.subsampling_kernel},
                  {"chunk_size", e.chunk_size},
                  {"ff_mult", e.ff_mult},
                  {"att_context", {e.att_context.left_tokens, e.att_context.right_chunks}}};
  const auto& d = c.decoder;
  j["decoder"] = {{"vocab_size", d.vocab_size},
                  {"embedding", d.embedding},
                  {"pred_hidden", d.pred_hidden},
                  {"joint_hidden", d.joint_hidden},
                  {"max_symbols_per_frame", d.max_symbols_per_frame}};
  j["imu"] = {{"mode", std::string(imu_mode_name(c.imu.mode))},
              {"filter", c.imu.filter},
              {"cutoff_hz", c.imu.cutoff_hz},
              {"rate", c.imu.sample_rate},
              {"width", c.imu.encoder.width},
              {"kernel", c.imu.encoder.kernel},
              {"strides", c.imu.encoder.strides}};
  j["eval"] = {{"attribution_cost", c.eval.attribution_cost}, {"normalize", c.eval.normalize}};
  return j.dump(2);
}

}  // namespace glassasr
