#pragma once

// End-to-end plumbing shared by the command-line tool and the tests:
// front end (beamforming + log-Mel stacking), model loading and streaming
// recognition with emission timestamps.

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "glassasr/beamform.hpp"
#include "glassasr/config.hpp"
#include "glassasr/encoder.hpp"
#include "glassasr/imu.hpp"
#include "glassasr/transducer.hpp"
#include "glassasr/wave.hpp"

namespace glassasr {

// Bank from the config file, or the default delay-and-sum bank.
BeamformerBank make_beamformer_bank(const PipelineConfig& config);

// Resample to the bank rate, beamform, log-Mel every beam and stack the
// features per frame (mouth beam last).
MatrixF front_end(const MultiChannelWave& wave, const BeamformerBank& bank, const MelConfig& mel);

struct StreamingModel {
  EncoderConfig encoder_config;
  DecoderConfig decoder_config;
  ImuEncoderConfig imu_config;
  EncoderParams encoder;
  DecoderParams decoder;
  std::optional<ImuEncoderParams> imu;  // present when the encoder fuses IMU features
  Vocabulary vocab = Vocabulary::synthetic(3);
};

// Randomly initialized from `seed`, or read from a tensor archive.
StreamingModel random_model(const PipelineConfig& config, std::uint64_t seed);
StreamingModel load_model(const PipelineConfig& config, const std::filesystem::path& weights);
TensorArchive model_archive(const StreamingModel& model);

// IMU features at the encoder token rate, preprocessed per config; empty
// when the IMU mode is off.
MatrixF imu_features(const ImuStream& imu, const PipelineConfig& config, const StreamingModel& model);

struct StreamTiming {
  double frame_hop = 0.01;       // seconds between feature frames
  double frame_length = 0.025;   // seconds of audio per feature frame
  double audio_duration = 0.0;   // seconds
  double arrival_chunk = 0.32;   // audio arrives in pieces of this length
};

struct StreamStep {
  std::size_t input_frames = 0;  // feature frames fed so far
  std::size_t released = 0;      // encoder tokens released by this step
  double wall_time = 0.0;        // audio time at which the step could run
};

struct StreamOutput {
  std::vector<EmittedToken> tokens;
  std::vector<StreamStep> steps;
  MatrixF hidden;  // concatenated encoder outputs
};

// Runs the cache-based encoder chunk by chunk and decodes released frames
// greedily. A token's emission time is the audio arrival time of the step
// that released its frame.
StreamOutput stream_recognize(const MatrixF& features, const MatrixF& aux, const StreamingModel& model,
                              const StreamTiming& timing);

// Runs fn(i) for i in [0, n) on up to `workers` threads; rethrows the first
// exception after all workers stop.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace glassasr
