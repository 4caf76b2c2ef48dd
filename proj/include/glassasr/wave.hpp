#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace glassasr {

// Internal processing rate; dataset audio is resampled to this on ingest.
inline constexpr int kProcessingRate = 16000;

// C channels x T samples of real amplitudes, stored channel-major.
class MultiChannelWave {
 public:
  MultiChannelWave() = default;
  MultiChannelWave(std::size_t channels, std::size_t frames, int sample_rate);

  // Throws std::invalid_argument on ragged channels or a non-positive rate.
  static MultiChannelWave from_channels(const std::vector<std::vector<double>>& channels, int sample_rate);
  static MultiChannelWave mono(std::vector<double> samples, int sample_rate);

  std::size_t channels() const noexcept { return channels_; }
  std::size_t frames() const noexcept { return frames_; }
  int sample_rate() const noexcept { return sample_rate_; }
  double duration() const noexcept { return sample_rate_ > 0 ? double(frames_) / sample_rate_ : 0.0; }

  std::span<double> channel(std::size_t c) { return {data_.data() + c * frames_, frames_}; }
  std::span<const double> channel(std::size_t c) const { return {data_.data() + c * frames_, frames_}; }

  // Sum of squares over all channels.
  double energy() const;
  bool all_finite() const;

  bool operator==(const MultiChannelWave&) const = default;

 private:
  std::size_t channels_ = 0;
  std::size_t frames_ = 0;
  int sample_rate_ = 0;
  std::vector<double> data_;
};

enum class WavEncoding { pcm16, float32 };

// Linear PCM (8/16/24/32-bit integer) or IEEE float RIFF/WAVE, including
// WAVE_FORMAT_EXTENSIBLE. Samples are normalized to [-1, 1].
// Throws DataError on a missing file, unsupported encoding or empty audio.
MultiChannelWave read_wave(const std::filesystem::path& path);

// pcm16 clips to [-1, 1) and rounds to the nearest 1/32768 step.
void write_wave(const MultiChannelWave& wave, const std::filesystem::path& path,
                WavEncoding encoding = WavEncoding::pcm16);

// Windowed-sinc polyphase resampling for a rational ratio up/down (reduced
// internally). Output length is ceil(T * up / down).
std::vector<double> resample_ratio(std::span<const double> x, long up, long down);

// Band-limited resampling of every channel to target_rate.
// Throws std::invalid_argument for a non-positive target rate.
MultiChannelWave resample(const MultiChannelWave& wave, int target_rate);

}  // namespace glassasr
