#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "glassasr/config.hpp"
#include "glassasr/error.hpp"
#include "glassasr/evaluate.hpp"
#include "glassasr/manifest.hpp"
#include "glassasr/pipeline.hpp"
#include "glassasr/random.hpp"
#include "glassasr/sampler.hpp"
#include "glassasr/segments.hpp"
#include "glassasr/simulate.hpp"
#include "glassasr/tensor_archive.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace glassasr;

namespace {

struct GlobalOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
};

PipelineConfig load_config(const GlobalOptions& g) {
  PipelineConfig cfg;
  if (!g.config.empty()) {
    cfg = parse_config(g.config);
  } else if (const char* env = std::getenv(kConfigEnvVar); env && *env) {
    cfg = parse_config(env);
  } else {
    cfg = default_config();
  }
  if (g.seed) cfg.seed = *g.seed;
  if (g.workers) cfg.workers = *g.workers;
  cfg.derive();
  return cfg;
}

std::string format_fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("failed writing " + path.string());
}

MultiChannelWave white_noise(std::uint64_t seed, int rate, double seconds) {
  Rng rng(seed);
  std::vector<double> x(std::size_t(seconds * rate));
  for (auto& v : x) v = 0.1 * normal01(rng);
  return MultiChannelWave::mono(std::move(x), rate);
}

std::string join_words(std::span<const WordRecord> words) {
  std::string s;
  for (const auto& w : words) {
    if (!s.empty()) s += ' ';
    s += w.text;
  }
  return s;
}

// ---------------------------------------------------------------- simulate

struct SimulateOptions {
  std::string out_dir;
  double hours = 0.1;
  bool speed_perturb = false;
  std::size_t synthetic_utterances = 40;
};

std::vector<AlignedUtterance> load_corpus(const PipelineConfig& cfg, const SimulateOptions& opt) {
  const int rate = cfg.simulation.sim.output_rate;
  std::vector<AlignedUtterance> corpus;
  if (cfg.simulation.corpus) {
    const auto records = read_manifest(*cfg.simulation.corpus);
    corpus.resize(records.size());
    const fs::path dir = cfg.simulation.corpus->parent_path();
    parallel_for(records.size(), cfg.resolved_workers(),
                 [&](std::size_t i) { corpus[i] = load_utterance(records[i], dir, rate); });
  } else {
    for (std::size_t i = 0; i < opt.synthetic_utterances; ++i) {
      corpus.push_back(synthetic_utterance(derive_seed(cfg.seed, 100 + i), rate, 4.0 + double(i % 5),
                                           cfg.decoder.vocab_size));
    }
  }
  if (opt.speed_perturb && !cfg.simulation.speed_factors.empty()) {
    const std::size_t n = corpus.size();
    std::vector<AlignedUtterance> extra(n);
    const auto& factors = cfg.simulation.speed_factors;
    parallel_for(n, cfg.resolved_workers(), [&](std::size_t i) {
      Rng rng(derive_seed(cfg.seed, 400 + i));
      extra[i] = speed_perturb(corpus[i], factors[uniform_index(rng, factors.size())]);
    });
    for (auto& u : extra) corpus.push_back(std::move(u));
  }
  if (corpus.size() < 2) throw DataError("simulation needs at least two utterances");
  return corpus;
}

int cmd_simulate(const PipelineConfig& cfg, const SimulateOptions& opt) {
  if (!(opt.hours >= 0.0)) throw ConfigError("hours", "must be non-negative");
  const int rate = cfg.simulation.sim.output_rate;
  const auto corpus = load_corpus(cfg, opt);

  std::vector<MultiChannelWave> rirs;
  for (const auto& p : cfg.simulation.rir_bank) {
    auto w = resample(read_wave(p), rate);
    if (w.channels() != kArrayChannels) throw DataError(p.string() + ": RIR must have 7 channels");
    rirs.push_back(std::move(w));
  }
  if (rirs.empty()) {
    for (std::size_t i = 0; i < 8; ++i) rirs.push_back(synthetic_rir(derive_seed(cfg.seed, 200 + i), rate));
  }
  std::vector<MultiChannelWave> noises;
  for (const auto& p : cfg.simulation.noise) noises.push_back(resample(read_wave(p), rate));
  if (noises.empty()) {
    for (std::size_t i = 0; i < 4; ++i) noises.push_back(white_noise(derive_seed(cfg.seed, 300 + i), rate, 20.0));
  }

  const std::size_t pairs_per_pass = corpus.size() / 2;
  std::map<std::size_t, Pairing> pairings;
  auto make_job = [&](std::size_t j) {
    const std::size_t pass = j / pairs_per_pass;
    if (!pairings.count(pass)) pairings.emplace(pass, pair_utterances(corpus.size(), derive_seed(cfg.seed, 500 + pass)));
    const auto [si, oi] = pairings.at(pass).pairs[j % pairs_per_pass];
    Rng rng(derive_seed(cfg.seed, 1'000'000 + j));
    SimJob job;
    job.self_utt = corpus[si];
    job.other_utt = corpus[oi];
    job.overlap_ratio = sample_overlap_ratio(cfg.simulation.sim, rng);
    job.snr_db = draw_snr(cfg.simulation.sim.snr_choices, rng);
    job.rir_self = rirs[uniform_index(rng, rirs.size())];
    job.rir_other = rirs[uniform_index(rng, rirs.size())];
    const auto& noise = noises[uniform_index(rng, noises.size())];
    const auto& noise_rir = rirs[uniform_index(rng, rirs.size())];
    job.noise = noise;
    if (noise.channels() == 1) job.rir_noise = noise_rir;
    job.seed = derive_seed(cfg.seed, 2'000'000 + j);
    job.rttm_merge_gap = cfg.simulation.sim.rttm_merge_gap;
    return job;
  };

  const fs::path out = opt.out_dir;
  fs::create_directories(out);
  write_text(out / "config.json", config_to_json(cfg) + "\n");
  std::ofstream provenance(out / "provenance.jsonl");
  if (!provenance) throw DataError("cannot write " + (out / "provenance.jsonl").string());

  const double target = opt.hours * 3600.0;
  const std::size_t batch = std::max<std::size_t>(4, cfg.resolved_workers());
  std::vector<ManifestRecord> manifest;
  double total = 0.0;
  std::size_t next = 0;
  while (total < target) {
    std::vector<SimJob> jobs;
    for (std::size_t k = 0; k < batch; ++k) jobs.push_back(make_job(next + k));
    std::vector<SimulatedConversation> convs(jobs.size());
    parallel_for(jobs.size(), cfg.resolved_workers(),
                 [&](std::size_t k) { convs[k] = simulate_conversation(jobs[k]); });
    for (std::size_t k = 0; k < convs.size() && total < target; ++k) {
      const auto& c = convs[k];
      char id[32];
      std::snprintf(id, sizeof id, "sim_%06zu", next + k);
      write_wave(c.mixture, out / (std::string(id) + ".wav"), WavEncoding::float32);
      write_rttm(c.rttm, out / (std::string(id) + ".rttm"), id);
      ManifestRecord r;
      r.id = id;
      r.audio = std::string(id) + ".wav";
      r.words = c.reference;
      r.transcript = join_words(c.reference);
      r.origin = Origin::simulated;
      r.duration = c.mixture.duration();
      manifest.push_back(r);
      const auto& p = c.provenance;
      json pj = {{"id", id},
                 {"seed", p.seed},
                 {"requested_overlap", p.requested_overlap},
                 {"measured_overlap", p.measured_overlap},
                 {"snr_db", p.snr_db ? json(*p.snr_db) : json(nullptr)},
                 {"other_onset", p.other_onset},
                 {"duration", p.duration}};
      provenance << pj.dump() << '\n';
      total += r.duration;
    }
    next += batch;
  }
  write_manifest(manifest, out / "manifest.jsonl");
  std::cout << "wrote " << manifest.size() << " conversations, " << format_fixed(total / 60.0, 2) << " min, to "
            << out.string() << '\n';
  return 0;
}

// ---------------------------------------------------------------- featurize

struct FeaturizeOptions {
  std::string wav, out, manifest, out_dir;
};

void featurize_file(const fs::path& wav, const fs::path& out, const BeamformerBank& bank, const MelConfig& mel) {
  const MatrixF f = front_end(read_wave(wav), bank, mel);
  TensorArchive ar;
  Tensor t;
  t.shape = {f.rows(), f.cols()};
  t.values.assign(f.data().begin(), f.data().end());
  ar.emplace("features", std::move(t));
  save_tensor_archive(ar, out);
}

int cmd_featurize(const PipelineConfig& cfg, const FeaturizeOptions& opt) {
  const BeamformerBank bank = make_beamformer_bank(cfg);
  if (!opt.wav.empty()) {
    if (opt.out.empty()) throw ConfigError("out", "--wav needs --out");
    featurize_file(opt.wav, opt.out, bank, cfg.mel);
    return 0;
  }
  if (opt.manifest.empty() || opt.out_dir.empty()) throw ConfigError("manifest", "give --wav/--out or --manifest/--out-dir");
  const auto records = read_manifest(opt.manifest);
  const fs::path dir = fs::path(opt.manifest).parent_path();
  fs::create_directories(opt.out_dir);
  parallel_for(records.size(), cfg.resolved_workers(), [&](std::size_t i) {
    const fs::path audio = records[i].audio.is_absolute() ? records[i].audio : dir / records[i].audio;
    featurize_file(audio, fs::path(opt.out_dir) / (records[i].id + ".features"), bank, cfg.mel);
  });
  std::cout << "featurized " << records.size() << " recordings into " << opt.out_dir << '\n';
  return 0;
}

// ---------------------------------------------------------------- stream

struct StreamOptions {
  std::string weights, wav, imu, imu_mode, imu_filter, recording_id, out;
  double chunk_ms = 0.0;
};

int cmd_stream(PipelineConfig cfg, const StreamOptions& opt) {
  if (!opt.imu_mode.empty()) {
    try {
      cfg.imu.mode = parse_imu_mode(opt.imu_mode);
    } catch (const std::invalid_argument&) {
      throw ConfigError("imu-mode", "expected accel, gyro, all or off");
    }
  }
  if (!opt.imu_filter.empty()) {
    if (opt.imu_filter != "on" && opt.imu_filter != "off") throw ConfigError("imu-filter", "expected on or off");
    cfg.imu.filter = opt.imu_filter == "on";
  }
  cfg.derive();
  if (cfg.imu.mode != ImuMode::off && opt.imu.empty()) throw ConfigError("imu", "IMU mode is on but no --imu file given");

  const StreamingModel model = opt.weights.empty() ? random_model(cfg, cfg.seed) : load_model(cfg, opt.weights);
  const MultiChannelWave wave = read_wave(opt.wav);
  const MatrixF features = front_end(wave, make_beamformer_bank(cfg), cfg.mel);

  MatrixF aux;
  if (cfg.imu.mode != ImuMode::off) {
    const MatrixF imu = imu_features(read_imu(opt.imu), cfg, model);
    const std::size_t tokens = (features.rows() + cfg.encoder.downsample_factor - 1) / cfg.encoder.downsample_factor;
    // Longer IMU recordings are cropped; up to one missing frame is zero-padded.
    if (imu.rows() + 1 < tokens) {
      throw DataError(opt.imu + ": IMU covers " + std::to_string(imu.rows()) + " frames, audio needs " +
                      std::to_string(tokens));
    }
    aux = MatrixF(tokens, imu.cols());
    for (std::size_t t = 0; t < std::min(tokens, imu.rows()); ++t) {
      std::copy(imu.row(t).begin(), imu.row(t).end(), aux.row(t).begin());
    }
  }

  StreamTiming timing;
  timing.frame_hop = cfg.mel.frame_hop;
  timing.frame_length = cfg.mel.frame_length;
  timing.audio_duration = wave.duration();
  timing.arrival_chunk = opt.chunk_ms > 0.0 ? opt.chunk_ms / 1000.0
                                            : double(cfg.encoder.chunk_frames()) * cfg.mel.frame_hop;
  const StreamOutput result = stream_recognize(features, aux, model, timing);

  const std::string id = opt.recording_id.empty() ? fs::path(opt.wav).stem().string() : opt.recording_id;
  std::ofstream file;
  if (!opt.out.empty()) {
    file.open(opt.out, std::ios::binary);
    if (!file) throw DataError("cannot write " + opt.out);
  }
  std::ostream& os = opt.out.empty() ? std::cout : file;
  for (const auto& t : result.tokens) os << to_json_line(TokenRecord{id, t}) << '\n';
  return 0;
}

// ---------------------------------------------------------------- eval

struct EvalOptions {
  std::string ref, hyp;
  bool per_recording = false;
};

json counts_json(const SpeakerCounts& c) {
  json j = {{"ref_words", c.ref_words},
            {"substitutions", c.substitutions},
            {"deletions", c.deletions},
            {"insertions", c.insertions},
            {"attribution_errors", c.attribution_errors}};
  j["wer"] = c.ref_words ? json(c.wer()) : json(nullptr);
  return j;
}

std::string wer_cell(const SpeakerCounts& c) { return c.ref_words ? format_fixed(c.wer(), 2) : "n/a"; }

int cmd_eval(const PipelineConfig& cfg, const EvalOptions& opt) {
  const auto records = read_manifest(opt.ref);
  const auto tokens = read_token_stream(opt.hyp);
  auto hyps = group_by_recording(tokens);
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!index.emplace(records[i].id, i).second) throw DataError(opt.ref + ": duplicate recording " + records[i].id);
  }
  for (const auto& [id, _] : hyps) {
    if (!index.count(id)) throw DataError(opt.hyp + ": unknown recording " + id);
  }

  std::vector<RecordingScore> scores(records.size());
  parallel_for(records.size(), cfg.resolved_workers(), [&](std::size_t i) {
    const auto& ref = records[i].words;
    const auto it = hyps.find(records[i].id);
    const std::vector<EmittedToken> none;
    const auto& hyp = it == hyps.end() ? none : it->second;
    scores[i] = score_recording(records[i].id, ref, hyp, align_multispeaker(ref, hyp, cfg.eval));
  });

  SpeakerCounts self, other;
  double latency_sum = 0.0;
  std::size_t latency_words = 0;
  for (const auto& s : scores) {
    self += s.self;
    other += s.other;
    latency_sum += s.latency_sum;
    latency_words += s.latency_words;
  }
  std::optional<double> overall;
  if (self.ref_words && other.ref_words) overall = overall_wer(self.wer(), other.wer());
  std::optional<double> latency;
  if (latency_words) latency = latency_sum / double(latency_words);

  auto row = [](const std::string& name, const SpeakerCounts& c) {
    std::cout << std::left << std::setw(10) << name << std::right << std::setw(8) << c.ref_words << std::setw(7)
              << c.substitutions << std::setw(7) << c.deletions << std::setw(7) << c.insertions << std::setw(7)
              << c.attribution_errors << std::setw(9) << wer_cell(c) << '\n';
  };
  std::cout << std::left << std::setw(10) << "speaker" << std::right << std::setw(8) << "words" << std::setw(7)
            << "sub" << std::setw(7) << "del" << std::setw(7) << "ins" << std::setw(7) << "attr" << std::setw(9)
            << "WER%" << '\n';
  row("SELF", self);
  row("OTHER", other);
  std::cout << "OVERALL WER% " << (overall ? format_fixed(*overall, 2) : "n/a") << '\n';
  std::cout << "mean latency " << (latency ? format_fixed(*latency * 1000.0, 1) + " ms" : "n/a") << " over "
            << latency_words << " words\n";
  if (opt.per_recording) {
    for (const auto& s : scores) {
      std::cout << s.recording << "  SELF " << wer_cell(s.self) << "  OTHER " << wer_cell(s.other) << '\n';
    }
  }

  json summary = {{"type", "summary"},
                  {"self", counts_json(self)},
                  {"other", counts_json(other)},
                  {"overall_wer", overall ? json(*overall) : json(nullptr)},
                  {"mean_latency_ms", latency ? json(*latency * 1000.0) : json(nullptr)},
                  {"latency_words", latency_words},
                  {"recordings", scores.size()}};
  std::cout << summary.dump() << '\n';
  if (opt.per_recording) {
    for (const auto& s : scores) {
      json r = {{"type", "recording"}, {"recording", s.recording}, {"self", counts_json(s.self)},
                {"other", counts_json(s.other)}};
      r["mean_latency_ms"] = s.latency_words ? json(1000.0 * s.latency_sum / double(s.latency_words)) : json(nullptr);
      std::cout << r.dump() << '\n';
    }
  }
  return 0;
}

// ---------------------------------------------------------------- sampler

struct SamplerOptions {
  std::string real, simulated;
  std::size_t batch_size = 16;
  std::size_t batches = 10;
};

int cmd_sampler(const PipelineConfig& cfg, const SamplerOptions& opt) {
  const auto real = read_manifest(opt.real);
  const auto sim = read_manifest(opt.simulated);
  if (real.empty()) throw DataError(opt.real + ": manifest is empty");
  if (sim.empty()) throw DataError(opt.simulated + ": manifest is empty");
  if (opt.batch_size == 0 || opt.batch_size % 2) throw ConfigError("batch-size", "must be a positive even number");
  BalancedBatchSampler sampler(real.size(), sim.size(), opt.batch_size, cfg.seed);
  for (std::size_t b = 0; b < opt.batches; ++b) {
    const Batch batch = sampler.next();
    json j = {{"batch", b}, {"epoch", batch.epoch}, {"real", json::array()}, {"simulated", json::array()}};
    for (auto i : batch.real) j["real"].push_back(real[i].id);
    for (auto i : batch.simulated) j["simulated"].push_back(sim[i].id);
    std::cout << j.dump() << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------- info

int cmd_info(const PipelineConfig& cfg, std::size_t batch) {
  const auto& e = cfg.encoder;
  const std::size_t tokens = lookahead_tokens(e);
  const std::size_t elements = e.layers * batch * e.att_context.left_tokens * e.hidden;
  std::cout << config_to_json(cfg) << '\n';
  std::cout << "token duration: " << format_fixed(cfg.token_duration() * 1000.0, 1) << " ms\n";
  std::cout << "chunk: " << e.chunk_size << " tokens (" << format_fixed(cfg.token_duration() * e.chunk_size * 1000.0, 1)
            << " ms)\n";
  std::cout << "algorithmic look-ahead: " << tokens << " tokens, "
            << format_fixed(lookahead(e, cfg.mel.frame_hop) * 1000.0, 1) << " ms\n";
  std::cout << "attention cache: " << e.layers << " x " << batch << " x " << e.att_context.left_tokens << " x " << e.hidden
            << " = " << elements << " elements (" << elements * sizeof(float) << " bytes)\n";
  std::cout << "convolution cache: " << e.layers << " x " << batch << " x " << (e.conv_kernel - 1) << " x "
            << e.hidden << " = " << e.layers * batch * (e.conv_kernel - 1) * e.hidden << " elements\n";
  return 0;
}

int cmd_init_weights(const PipelineConfig& cfg, const std::string& out) {
  save_tensor_archive(model_archive(random_model(cfg, cfg.seed)), out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming multi-talker ASR pipeline for smart-glasses microphone arrays.", "glassasr"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", "glassasr 1.0");

  GlobalOptions g;
  std::uint64_t seed = 0;
  std::size_t workers = 0;
  app.add_option("-c,--config", g.config,
                 std::string("Configuration file (JSON); defaults to $") + kConfigEnvVar + ", then built-in defaults");
  auto* seed_opt = app.add_option("--seed", seed, "Random seed; overrides the config");
  auto* workers_opt = app.add_option("--workers", workers, "Worker threads, 0 for all cores; overrides the config");

  SimulateOptions sim;
  auto* c_sim = app.add_subcommand("simulate", "Simulate overlapped two-speaker conversations");
  c_sim->add_option("--out-dir", sim.out_dir, "Output directory")->required();
  c_sim->add_option("--hours", sim.hours, "Hours of audio to generate")->capture_default_str();
  c_sim->add_flag("--speed-perturb", sim.speed_perturb, "Add one speed-perturbed copy of every source utterance");
  c_sim->add_option("--synthetic-utterances", sim.synthetic_utterances,
                    "Synthetic utterances generated when the config names no corpus")
      ->capture_default_str();

  FeaturizeOptions feat;
  auto* c_feat = app.add_subcommand("featurize", "Beamform and compute stacked log-Mel features");
  c_feat->add_option("--wav", feat.wav, "Seven-channel input WAVE file");
  c_feat->add_option("--out", feat.out, "Output tensor archive for --wav");
  c_feat->add_option("--manifest", feat.manifest, "Manifest of recordings to featurize");
  c_feat->add_option("--out-dir", feat.out_dir, "Output directory for --manifest (one <id>.features each)");

  StreamOptions str;
  auto* c_str = app.add_subcommand("stream", "Streaming recognition of one recording");
  c_str->add_option("--weights", str.weights, "Tensor archive with model weights (random from --seed if absent)");
  c_str->add_option("--wav", str.wav, "Seven-channel input WAVE file")->required();
  c_str->add_option("--chunk-ms", str.chunk_ms, "Audio arrival granularity in ms (default: one encoder chunk)");
  c_str->add_option("--imu", str.imu, "IMU recording (timestamp_ms ax ay az gx gy gz lines, or 6-channel WAVE)");
  c_str->add_option("--imu-mode", str.imu_mode, "IMU axes to use: accel, gyro, all or off");
  c_str->add_option("--imu-filter", str.imu_filter, "High-pass filter the IMU signal: on or off");
  c_str->add_option("--recording-id", str.recording_id, "Recording id written with each token (default: file stem)");
  c_str->add_option("--out", str.out, "Token stream output file (default: stdout)");

  EvalOptions ev;
  auto* c_ev = app.add_subcommand("eval", "Score a token stream against reference transcripts");
  c_ev->add_option("--ref", ev.ref, "Reference manifest with word timings and speakers")->required();
  c_ev->add_option("--hyp", ev.hyp, "Hypothesis token stream")->required();
  c_ev->add_flag("--per-recording", ev.per_recording, "Also report every recording");

  SamplerOptions smp;
  auto* c_smp = app.add_subcommand("sampler", "Print balanced real/simulated training batches");
  c_smp->add_option("--real", smp.real, "Manifest of real recordings")->required();
  c_smp->add_option("--simulated", smp.simulated, "Manifest of simulated recordings")->required();
  c_smp->add_option("--batch-size", smp.batch_size, "Records per batch, even")->capture_default_str();
  c_smp->add_option("--batches", smp.batches, "Batches to print")->capture_default_str();

  std::size_t info_batch = 1;
  auto* c_info = app.add_subcommand("info", "Print the resolved config, look-ahead and cache footprint");
  c_info->add_option("--batch", info_batch, "Streams sharing the cache")->capture_default_str();

  std::string init_out;
  auto* c_init = app.add_subcommand("init-weights", "Write randomly initialized model weights");
  c_init->add_option("--out", init_out, "Output tensor archive")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  if (*seed_opt) g.seed = seed;
  if (*workers_opt) g.workers = workers;

  try {
    const PipelineConfig cfg = load_config(g);
    if (*c_sim) return cmd_simulate(cfg, sim);
    if (*c_feat) return cmd_featurize(cfg, feat);
    if (*c_str) return cmd_stream(cfg, str);
    if (*c_ev) return cmd_eval(cfg, ev);
    if (*c_smp) return cmd_sampler(cfg, smp);
    if (*c_info) return cmd_info(cfg, info_batch);
    if (*c_init) return cmd_init_weights(cfg, init_out);
  } catch (const ConfigError& e) {
    std::cerr << "glassasr: config error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    std::cerr << "glassasr: " << e.what() << '\n';
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "glassasr: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "glassasr: invalid input: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "glassasr: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
