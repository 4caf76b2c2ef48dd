#pragma once

// Pipeline configuration: a JSON document whose sections mirror the module
// settings. Unknown keys are rejected, defaults fill everything omitted and
// relative paths resolve against the configuration file's directory.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "glassasr/encoder.hpp"
#include "glassasr/evaluate.hpp"
#include "glassasr/imu.hpp"
#include "glassasr/mel.hpp"
#include "glassasr/simulate.hpp"
#include "glassasr/transducer.hpp"

namespace glassasr {

inline constexpr const char* kConfigEnvVar = "GLASSASR_CONFIG";

struct SimulationSettings {
  SimConfig sim;
  std::vector<double> speed_factors{0.9, 1.1};
  std::optional<std::filesystem::path> corpus;  // manifest of aligned single-speaker utterances
  std::vector<std::filesystem::path> rir_bank;  // 7-channel RIR waves
  std::vector<std::filesystem::path> noise;     // noise waves
};

struct BeamformerSettings {
  std::optional<std::filesystem::path> bank;  // absent: generated delay-and-sum bank
  std::size_t horizontal_directions = 12;
  std::size_t taps = 65;
};

struct ImuSettings {
  ImuMode mode = ImuMode::off;
  bool filter = true;
  double cutoff_hz = 20.0;
  double sample_rate = 1000.0;
  ImuEncoderConfig encoder;
};

struct PipelineConfig {
  std::uint64_t seed = 0;
  std::size_t workers = 0;  // 0: all available cores
  SimulationSettings simulation;
  BeamformerSettings beamformer;
  MelConfig mel;
  EncoderConfig encoder;
  DecoderConfig decoder;
  ImuSettings imu;
  AlignmentOptions eval;
  std::filesystem::path source;  // file the config was read from, empty for defaults

  // Beams entering the encoder: K horizontal + mouth, or the bank's count.
  std::size_t beam_count() const;
  // Recomputes the fields implied by others (encoder input/aux widths,
  // decoder encoder width, IMU axes and frame rate). Call after overrides.
  void derive();
  std::size_t resolved_workers() const;
  // Seconds per encoder token.
  double token_duration() const { return mel.frame_hop * double(encoder.downsample_factor); }
};

// Throws DataError if the file cannot be read or is not valid JSON, and
// ConfigError (naming the dotted key) for unknown keys, wrong types,
// constraint violations and referenced files that do not exist.
PipelineConfig parse_config(const std::filesystem::path& path);
PipelineConfig parse_config_text(std::string_view text, const std::filesystem::path& base_dir = {});
PipelineConfig default_config();

// Pretty-printed JSON that parse_config_text accepts and that round-trips.
std::string config_to_json(const PipelineConfig& config);

}  // namespace glassasr
