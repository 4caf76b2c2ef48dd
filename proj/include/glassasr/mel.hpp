#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "glassasr/matrix.hpp"
#include "glassasr/wave.hpp"

namespace glassasr {

struct MelConfig {
  double frame_length = 0.025;  // seconds
  double frame_hop = 0.010;
  std::size_t mel_bins = 80;
  double floor = 1e-10;  // log(max(energy, floor))
  double low_freq = 0.0;
  double high_freq = 0.0;  // <= 0 means Nyquist
};

struct LogMelFeatures {
  MatrixF frames;  // [time][mel_bin]
  double frame_hop = 0.0;
  double frame_length = 0.0;
  std::size_t mel_bins = 0;
};

// Framing (snip edges), Hamming window, power spectrum, HTK-mel triangular
// filterbank, natural log with floor. No mean or variance normalization.
// Throws std::invalid_argument if the signal is shorter than one frame.
LogMelFeatures log_mel(std::span<const double> signal, int sample_rate, const MelConfig& config = {});
LogMelFeatures log_mel(const MultiChannelWave& mono, const MelConfig& config = {});

// 1 + floor((samples - window) / hop), or 0 if shorter than one window.
std::size_t frame_count(std::size_t samples, int sample_rate, const MelConfig& config);

// Peak frequency (Hz) of each mel filter.
std::vector<double> mel_center_frequencies(int sample_rate, const MelConfig& config = {});

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Per-frame concatenation in input order; callers pass the mouth direction last.
// Throws std::invalid_argument on frame-count or hop mismatch.
MatrixF assemble_encoder_input(std::span<const LogMelFeatures> features);

}  // namespace glassasr
