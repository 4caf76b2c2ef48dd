#pragma once

// Line-delimited JSON records: utterance manifests and hypothesis token
// streams. One record per line, UTF-8.

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "glassasr/types.hpp"
#include "glassasr/wave.hpp"

namespace glassasr {

enum class Origin { real, simulated };

struct ManifestRecord {
  std::string id;
  std::filesystem::path audio;  // relative paths resolve against the manifest's directory
  std::string transcript;
  std::vector<WordRecord> words;
  std::optional<Speaker> speaker;  // role of a single-speaker utterance; absent for conversations
  Origin origin = Origin::real;
  double duration = 0.0;  // seconds, 0 when unknown

  bool operator==(const ManifestRecord&) const = default;
};

// Throws DataError naming file and line on malformed records.
std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path);
void write_manifest(std::span<const ManifestRecord> records, const std::filesystem::path& path);
std::string to_json_line(const ManifestRecord& record);

// Mono audio with a word-level alignment.
struct AlignedUtterance {
  MultiChannelWave wave;
  std::vector<WordRecord> words;
  std::string transcript;

  double duration() const { return wave.duration(); }
};

// Throws std::invalid_argument unless the wave is mono and the words are
// non-empty, time-ordered, non-overlapping and inside [0, duration].
void validate(const AlignedUtterance& utt);

// Loads audio (resampled to target_rate) and alignment for one record.
AlignedUtterance load_utterance(const ManifestRecord& record, const std::filesystem::path& manifest_dir,
                                int target_rate = kProcessingRate);

struct TokenRecord {
  std::string recording;
  EmittedToken token;

  bool operator==(const TokenRecord&) const = default;
};

std::string to_json_line(const TokenRecord& record);
// Reads {"recording", "token", "speaker", "emission_time_ms"} lines.
std::vector<TokenRecord> read_token_stream(const std::filesystem::path& path);

// Groups hypothesis tokens by recording id, preserving order.
std::map<std::string, std::vector<EmittedToken>> group_by_recording(std::span<const TokenRecord> tokens);

}  // namespace glassasr
