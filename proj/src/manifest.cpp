#include "glassasr/manifest.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "glassasr/error.hpp"

namespace glassasr {

using nlohmann::json;

namespace {

Speaker speaker_from_json(const json& j, const char* field) {
  auto s = parse_speaker(j.at(field).get<std::string>());
  if (!s) throw std::invalid_argument(std::string("bad speaker in '") + field + "'");
  return *s;
}

ManifestRecord record_from_json(const json& j) {
  ManifestRecord r;
  r.id = j.at("id").get<std::string>();
  r.audio = j.value("audio", std::string());
  r.transcript = j.value("transcript", std::string());
  if (j.contains("speaker") && !j.at("speaker").is_null()) r.speaker = speaker_from_json(j, "speaker");
  const std::string origin = j.value("origin", std::string("real"));
  if (origin == "real") {
    r.origin = Origin::real;
  } else if (origin == "simulated") {
    r.origin = Origin::simulated;
  } else {
    throw std::invalid_argument("origin must be 'real' or 'simulated'");
  }
  r.duration = j.value("duration", 0.0);
  if (j.contains("words")) {
    for (const auto& w : j.at("words")) {
      WordRecord word;
      word.text = w.at("text").get<std::string>();
      if (word.text.empty()) throw std::invalid_argument("empty word text");
      word.speaker = w.contains("speaker") ? speaker_from_json(w, "speaker") : r.speaker.value_or(Speaker::self);
      word.start = w.at("start").get<double>();
      word.end = w.at("end").get<double>();
      if (word.end < word.start) throw std::invalid_argument("word ends before it starts");
      r.words.push_back(std::move(word));
    }
  }
  return r;
}

template <typename F>
void for_each_line(const std::filesystem::path& path, F&& handle) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      handle(json::parse(line));
    } catch (const std::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

}  // namespace

std::string to_json_line(const ManifestRecord& r) {
  json j;
  j["id"] = r.id;
  j["audio"] = r.audio.generic_string();
  j["transcript"] = r.transcript;
  j["origin"] = r.origin == Origin::real ? "real" : "simulated";
  if (r.speaker) j["speaker"] = speaker_name(*r.speaker);
  if (r.duration > 0.0) j["duration"] = r.duration;
  json words = json::array();
  for (const auto& w : r.words) {
    words.push_back({{"text", w.text}, {"speaker", speaker_name(w.speaker)}, {"start", w.start}, {"end", w.end}});
  }
  j["words"] = std::move(words);
  return j.dump();
}

std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path) {
  std::vector<ManifestRecord> out;
  for_each_line(path, [&](const json& j) { out.push_back(record_from_json(j)); });
  return out;
}

void write_manifest(std::span<const ManifestRecord> records, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& r : records) out << to_json_line(r) << '\n';
  if (!out) throw DataError("write failed: " + path.string());
}

void validate(const AlignedUtterance& utt) {
  if (utt.wave.channels() != 1) throw std::invalid_argument("aligned utterance must be mono");
  const double dur = utt.duration();
  double prev_end = 0.0;
  for (const auto& w : utt.words) {
    if (w.text.empty()) throw std::invalid_argument("empty word text");
    if (w.start < prev_end - 1e-9 || w.end < w.start) throw std::invalid_argument("word intervals not monotone: " + w.text);
    if (w.start < 0.0 || w.end > dur + 1e-6) throw std::invalid_argument("word outside utterance: " + w.text);
    prev_end = w.end;
  }
}

AlignedUtterance load_utterance(const ManifestRecord& record, const std::filesystem::path& manifest_dir,
                                int target_rate) {
  const auto path = record.audio.is_absolute() ? record.audio : manifest_dir / record.audio;
  MultiChannelWave wave = read_wave(path);
  if (wave.channels() != 1) throw DataError(path.string() + ": expected mono audio for an aligned utterance");
  AlignedUtterance utt{resample(wave, target_rate), record.words, record.transcript};
  try {
    validate(utt);
  } catch (const std::invalid_argument& e) {
    throw DataError(record.id + ": " + e.what());
  }
  return utt;
}

std::string to_json_line(const TokenRecord& r) {
  json j{{"recording", r.recording},
         {"token", r.token.token},
         {"speaker", speaker_name(r.token.speaker)},
         {"emission_time_ms", r.token.emission_time * 1000.0}};
  return j.dump();
}

std::vector<TokenRecord> read_token_stream(const std::filesystem::path& path) {
  std::vector<TokenRecord> out;
  for_each_line(path, [&](const json& j) {
    TokenRecord r;
    r.recording = j.value("recording", std::string());
    r.token.token = j.at("token").get<std::string>();
    r.token.speaker = speaker_from_json(j, "speaker");
    r.token.emission_time = j.at("emission_time_ms").get<double>() / 1000.0;
    out.push_back(std::move(r));
  });
  return out;
}

std::map<std::string, std::vector<EmittedToken>> group_by_recording(std::span<const TokenRecord> tokens) {
  std::map<std::string, std::vector<EmittedToken>> out;
  for (const auto& t : tokens) out[t.recording].push_back(t.token);
  return out;
}

}  // namespace glassasr
