#include "glassasr/wave.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>

#include "glassasr/error.hpp"
#include "glassasr/kernels.hpp"

namespace glassasr {

MultiChannelWave::MultiChannelWave(std::size_t channels, std::size_t frames, int sample_rate)
    : channels_(channels), frames_(frames), sample_rate_(sample_rate), data_(channels * frames, 0.0) {
  if (sample_rate <= 0) throw std::invalid_argument("sample rate must be positive");
}

MultiChannelWave MultiChannelWave::from_channels(const std::vector<std::vector<double>>& channels, int sample_rate) {
  const std::size_t frames = channels.empty() ? 0 : channels.front().size();
  MultiChannelWave w(channels.size(), frames, sample_rate);
  for (std::size_t c = 0; c < channels.size(); ++c) {
    if (channels[c].size() != frames) throw std::invalid_argument("channels differ in length");
    std::copy(channels[c].begin(), channels[c].end(), w.channel(c).begin());
  }
  return w;
}

MultiChannelWave MultiChannelWave::mono(std::vector<double> samples, int sample_rate) {
  MultiChannelWave w(1, samples.size(), sample_rate);
  w.data_ = std::move(samples);
  return w;
}

double MultiChannelWave::energy() const {
  return std::inner_product(data_.begin(), data_.end(), data_.begin(), 0.0);
}

bool MultiChannelWave::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

// ---------------------------------------------------------------------------
// RIFF/WAVE

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t le32(const unsigned char* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
}
std::uint16_t le16(const unsigned char* p) { return std::uint16_t(p[0] | p[1] << 8); }

void put16(std::ostream& os, std::uint16_t v) {
  const char b[2] = {char(v & 0xff), char(v >> 8)};
  os.write(b, 2);
}
void put32(std::ostream& os, std::uint32_t v) {
  const char b[4] = {char(v & 0xff), char((v >> 8) & 0xff), char((v >> 16) & 0xff), char(v >> 24)};
  os.write(b, 4);
}

double decode_sample(const unsigned char* p, std::uint16_t format, std::uint16_t bits) {
  if (format == kFormatFloat) {
    if (bits == 32) return std::bit_cast<float>(le32(p));
    std::uint64_t v = std::uint64_t(le32(p)) | std::uint64_t(le32(p + 4)) << 32;
    return std::bit_cast<double>(v);
  }
  switch (bits) {
    case 8:
      return (double(p[0]) - 128.0) / 128.0;
    case 16:
      return double(std::int16_t(le16(p))) / 32768.0;
    case 24: {
      std::int32_t v = std::int32_t(std::uint32_t(p[0]) << 8 | std::uint32_t(p[1]) << 16 | std::uint32_t(p[2]) << 24) >> 8;
      return double(v) / 8388608.0;
    }
    default:
      return double(std::int32_t(le32(p))) / 2147483648.0;
  }
}

}  // namespace

MultiChannelWave read_wave(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open wave file: " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string where = path.string();
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw DataError(where + ": not a RIFF/WAVE file");
  }

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* hdr = bytes.data() + pos;
    std::size_t size = le32(hdr + 4);
    std::size_t body = pos + 8;
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (size < 16 || body + size > bytes.size()) throw DataError(where + ": truncated fmt chunk");
      format = le16(bytes.data() + body);
      channels = le16(bytes.data() + body + 2);
      rate = le32(bytes.data() + body + 4);
      bits = le16(bytes.data() + body + 14);
      if (format == kFormatExtensible) {
        if (size < 26) throw DataError(where + ": truncated extensible fmt chunk");
        format = le16(bytes.data() + body + 24);
      }
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = std::min(size, bytes.size() - body);
    }
    pos = body + size + (size & 1);
  }

  if (format == 0) throw DataError(where + ": missing fmt chunk");
  if (!data) throw DataError(where + ": missing data chunk");
  const bool pcm_ok = format == kFormatPcm && (bits == 8 || bits == 16 || bits == 24 || bits == 32);
  const bool float_ok = format == kFormatFloat && (bits == 32 || bits == 64);
  if (!pcm_ok && !float_ok) {
    throw DataError(where + ": unsupported encoding (format " + std::to_string(format) + ", " + std::to_string(bits) +
                    " bits)");
  }
  if (channels == 0 || rate == 0) throw DataError(where + ": invalid channel count or sample rate");

  const std::size_t bytes_per_sample = bits / 8;
  const std::size_t frames = data_size / (bytes_per_sample * channels);
  if (frames == 0) throw DataError(where + ": zero-length audio");

  MultiChannelWave wave(channels, frames, static_cast<int>(rate));
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t c = 0; c < channels; ++c) {
      wave.channel(c)[t] = decode_sample(data + (t * channels + c) * bytes_per_sample, format, bits);
    }
  }
  return wave;
}

void write_wave(const MultiChannelWave& wave, const std::filesystem::path& path, WavEncoding encoding) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write wave file: " + path.string());
  const std::uint16_t channels = static_cast<std::uint16_t>(wave.channels());
  const std::uint16_t bits = encoding == WavEncoding::pcm16 ? 16 : 32;
  const std::uint32_t block = channels * (bits / 8);
  const std::uint32_t data_size = static_cast<std::uint32_t>(wave.frames() * block);

  out.write("RIFF", 4);
  put32(out, 36 + data_size);
  out.write("WAVEfmt ", 8);
  put32(out, 16);
  put16(out, encoding == WavEncoding::pcm16 ? kFormatPcm : kFormatFloat);
  put16(out, channels);
  put32(out, static_cast<std::uint32_t>(wave.sample_rate()));
  put32(out, static_cast<std::uint32_t>(wave.sample_rate()) * block);
  put16(out, static_cast<std::uint16_t>(block));
  put16(out, bits);
  out.write("data", 4);
  put32(out, data_size);

  std::vector<char> buf(data_size);
  char* p = buf.data();
  for (std::size_t t = 0; t < wave.frames(); ++t) {
    for (std::size_t c = 0; c < channels; ++c) {
      const double v = wave.channel(c)[t];
      if (encoding == WavEncoding::pcm16) {
        const double q = std::clamp(std::round(v * 32768.0), -32768.0, 32767.0);
        const auto s = static_cast<std::uint16_t>(static_cast<std::int16_t>(q));
        *p++ = char(s & 0xff);
        *p++ = char(s >> 8);
      } else {
        const auto s = std::bit_cast<std::uint32_t>(static_cast<float>(v));
        for (int b = 0; b < 4; ++b) *p++ = char((s >> (8 * b)) & 0xff);
      }
    }
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw DataError("write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// Resampling

namespace {

constexpr double kZeroCrossings = 64.0;  // per side, at the lower of the two rates
constexpr double kRolloff = 0.97;
constexpr double kKaiserBeta = 8.6;

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  const double px = M_PI * x;
  return std::sin(px) / px;
}

}  // namespace

std::vector<double> resample_ratio(std::span<const double> x, long up, long down) {
  if (up <= 0 || down <= 0) throw std::invalid_argument("resample ratio must be positive");
  const long g = std::gcd(up, down);
  up /= g;
  down /= g;
  if (up == 1 && down == 1) return {x.begin(), x.end()};

  // Cutoff in cycles per input sample.
  const double fc = 0.5 * std::min(1.0, double(up) / double(down)) * kRolloff;
  const double half_width = kZeroCrossings / (2.0 * fc);
  const long reach = static_cast<long>(std::ceil(half_width));
  const std::size_t taps = static_cast<std::size_t>(2 * reach + 1);
  const double i0_beta = std::cyl_bessel_i(0.0, kKaiserBeta);

  // phase p covers fractional offsets p/up; tap j covers input base + j - reach.
  std::vector<double> table(static_cast<std::size_t>(up) * taps);
  for (long p = 0; p < up; ++p) {
    const double frac = double(p) / double(up);
    double* row = table.data() + p * taps;
    double sum = 0.0;
    for (std::size_t j = 0; j < taps; ++j) {
      const double tau = frac - (double(j) - double(reach));
      const double r = tau / half_width;
      double w = 0.0;
      if (std::abs(r) <= 1.0) {
        w = 2.0 * fc * sinc(2.0 * fc * tau) * std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(1.0 - r * r)) / i0_beta;
      }
      row[j] = w;
      sum += w;
    }
    for (std::size_t j = 0; j < taps; ++j) row[j] /= sum;
  }

  const std::size_t n_in = x.size();
  const std::size_t n_out = static_cast<std::size_t>((static_cast<long long>(n_in) * up + down - 1) / down);
  std::vector<double> y(n_out, 0.0);
  for (std::size_t n = 0; n < n_out; ++n) {
    const long long num = static_cast<long long>(n) * down;
    const long long base = num / up;
    const long phase = static_cast<long>(num % up);
    const double* row = table.data() + phase * taps;
    const long long first = base - reach;
    const long long lo = std::max<long long>(0, first);
    const long long hi = std::min<long long>(static_cast<long long>(n_in), first + static_cast<long long>(taps));
    if (lo >= hi) continue;
    y[n] = kernels::dot(std::span<const double>(row + (lo - first), static_cast<std::size_t>(hi - lo)),
                        x.subspan(static_cast<std::size_t>(lo), static_cast<std::size_t>(hi - lo)));
  }
  return y;
}

MultiChannelWave resample(const MultiChannelWave& wave, int target_rate) {
  if (target_rate <= 0) throw std::invalid_argument("resample: target rate must be positive");
  if (target_rate == wave.sample_rate()) return wave;
  std::vector<std::vector<double>> out(wave.channels());
  for (std::size_t c = 0; c < wave.channels(); ++c) {
    out[c] = resample_ratio(wave.channel(c), target_rate, wave.sample_rate());
  }
  return MultiChannelWave::from_channels(out, target_rate);
}

}  // namespace glassasr
