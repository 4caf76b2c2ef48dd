#include "glassasr/mel.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include "fft.hpp"

namespace glassasr {
namespace {

std::size_t window_samples(int rate, const MelConfig& c) { return std::size_t(std::lround(c.frame_length * rate)); }
std::size_t hop_samples(int rate, const MelConfig& c) { return std::size_t(std::lround(c.frame_hop * rate)); }

void check_config(int rate, const MelConfig& c) {
  if (rate <= 0) throw std::invalid_argument("log_mel: sample rate must be positive");
  if (c.mel_bins == 0) throw std::invalid_argument("log_mel: mel_bins must be positive");
  if (window_samples(rate, c) < 2 || hop_samples(rate, c) < 1) throw std::invalid_argument("log_mel: frame too short");
  if (!(c.floor > 0.0)) throw std::invalid_argument("log_mel: floor must be positive");
}

double high_freq(int rate, const MelConfig& c) { return c.high_freq > 0.0 ? c.high_freq : rate / 2.0; }

// [bin][fft_bin] triangular weights over the one-sided spectrum.
std::vector<std::vector<double>> filterbank(int rate, std::size_t nfft, const MelConfig& c) {
  const double lo = hz_to_mel(c.low_freq);
  const double hi = hz_to_mel(high_freq(rate, c));
  const double step = (hi - lo) / double(c.mel_bins + 1);
  const std::size_t bins = nfft / 2 + 1;
  std::vector<std::vector<double>> fb(c.mel_bins, std::vector<double>(bins, 0.0));
  for (std::size_t m = 0; m < c.mel_bins; ++m) {
    const double left = lo + step * double(m);
    const double center = left + step;
    const double right = center + step;
    for (std::size_t k = 0; k < bins; ++k) {
      const double mel = hz_to_mel(double(k) * rate / double(nfft));
      if (mel > left && mel < right) {
        fb[m][k] = mel <= center ? (mel - left) / (center - left) : (right - mel) / (right - center);
      }
    }
  }
  return fb;
}

}  // namespace

double hz_to_mel(double hz) { return 1127.0 * std::log(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::exp(mel / 1127.0) - 1.0); }

std::size_t frame_count(std::size_t samples, int sample_rate, const MelConfig& config) {
  const std::size_t win = window_samples(sample_rate, config);
  const std::size_t hop = hop_samples(sample_rate, config);
  return samples < win ? 0 : 1 + (samples - win) / hop;
}

std::vector<double> mel_center_frequencies(int sample_rate, const MelConfig& config) {
  check_config(sample_rate, config);
  const double lo = hz_to_mel(config.low_freq);
  const double hi = hz_to_mel(high_freq(sample_rate, config));
  const double step = (hi - lo) / double(config.mel_bins + 1);
  std::vector<double> out;
  for (std::size_t m = 0; m < config.mel_bins; ++m) out.push_back(mel_to_hz(lo + step * double(m + 1)));
  return out;
}

LogMelFeatures log_mel(std::span<const double> signal, int sample_rate, const MelConfig& config) {
  check_config(sample_rate, config);
  const std::size_t win = window_samples(sample_rate, config);
  const std::size_t hop = hop_samples(sample_rate, config);
  const std::size_t frames = frame_count(signal.size(), sample_rate, config);
  if (frames == 0) {
    throw std::invalid_argument("log_mel: signal of " + std::to_string(signal.size()) + " samples is shorter than one " +
                                std::to_string(win) + "-sample frame");
  }
  std::size_t nfft = 1;
  while (nfft < win) nfft <<= 1;

  std::vector<double> window(win);
  for (std::size_t n = 0; n < win; ++n) window[n] = 0.54 - 0.46 * std::cos(2.0 * M_PI * double(n) / double(win - 1));
  const auto fb = filterbank(sample_rate, nfft, config);
  const double log_floor = std::log(config.floor);

  detail::RealFft fft(nfft);
  std::vector<double> buf(nfft, 0.0);
  std::vector<std::complex<double>> spec(nfft / 2 + 1);
  std::vector<double> power(nfft / 2 + 1);

  LogMelFeatures out{MatrixF(frames, config.mel_bins), config.frame_hop, config.frame_length, config.mel_bins};
  for (std::size_t f = 0; f < frames; ++f) {
    std::fill(buf.begin(), buf.end(), 0.0);
    for (std::size_t n = 0; n < win; ++n) buf[n] = signal[f * hop + n] * window[n];
    fft.forward(buf, spec);
    for (std::size_t k = 0; k < spec.size(); ++k) power[k] = std::norm(spec[k]);
    auto row = out.frames.row(f);
    for (std::size_t m = 0; m < config.mel_bins; ++m) {
      double e = 0.0;
      for (std::size_t k = 0; k < power.size(); ++k) e += fb[m][k] * power[k];
      row[m] = static_cast<float>(e > config.floor ? std::log(e) : log_floor);
    }
  }
  return out;
}

LogMelFeatures log_mel(const MultiChannelWave& mono, const MelConfig& config) {
  if (mono.channels() != 1) throw std::invalid_argument("log_mel expects a single-channel wave");
  return log_mel(mono.channel(0), mono.sample_rate(), config);
}

MatrixF assemble_encoder_input(std::span<const LogMelFeatures> features) {
  if (features.empty()) throw std::invalid_argument("assemble_encoder_input: no feature streams");
  const std::size_t frames = features.front().frames.rows();
  std::size_t width = 0;
  for (const auto& f : features) {
    if (f.frames.rows() != frames) throw std::invalid_argument("assemble_encoder_input: frame-count mismatch");
    if (f.frame_hop != features.front().frame_hop) throw std::invalid_argument("assemble_encoder_input: hop mismatch");
    width += f.frames.cols();
  }
  MatrixF out(frames, width);
  for (std::size_t t = 0; t < frames; ++t) {
    auto dst = out.row(t).begin();
    for (const auto& f : features) dst = std::copy(f.frames.row(t).begin(), f.frames.row(t).end(), dst);
  }
  return out;
}

}  // namespace glassasr
