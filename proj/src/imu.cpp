#include "glassasr/imu.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "glassasr/error.hpp"
#include "glassasr/kernels.hpp"
#include "glassasr/nn.hpp"
#include "glassasr/wave.hpp"

namespace glassasr {

void ImuStream::validate() const {
  if (axes() != 3 && axes() != 6) throw std::invalid_argument("IMU stream must have 3 or 6 axes");
  if (!(sample_rate > 0.0)) throw std::invalid_argument("IMU sample rate must be positive");
  for (const auto& axis : samples) {
    if (axis.size() != length()) throw std::invalid_argument("IMU axes differ in length");
    for (double v : axis) {
      if (!std::isfinite(v)) throw std::invalid_argument("IMU stream contains non-finite samples");
    }
  }
}

ImuMode parse_imu_mode(std::string_view text) {
  std::string s(text);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "accel") return ImuMode::accel;
  if (s == "gyro") return ImuMode::gyro;
  if (s == "all") return ImuMode::all;
  if (s == "off") return ImuMode::off;
  throw std::invalid_argument("unknown IMU mode '" + std::string(text) + "' (expected accel, gyro, all or off)");
}

std::string_view imu_mode_name(ImuMode mode) {
  switch (mode) {
    case ImuMode::accel: return "accel";
    case ImuMode::gyro: return "gyro";
    case ImuMode::all: return "all";
    case ImuMode::off: return "off";
  }
  return "?";
}

std::vector<Biquad> butterworth_highpass(int order, double cutoff_hz, double sample_rate) {
  if (order < 2 || order % 2 != 0) throw std::invalid_argument("Butterworth order must be even and >= 2");
  if (!(cutoff_hz > 0.0) || !(cutoff_hz < sample_rate / 2.0)) {
    throw std::invalid_argument("high-pass cutoff must lie in (0, sample_rate / 2)");
  }
  const double k = std::tan(std::numbers::pi * cutoff_hz / sample_rate);
  const double k2 = k * k;
  std::vector<Biquad> sections;
  for (int i = 0; i < order / 2; ++i) {
    // Pole pair quality factor of the analog prototype.
    const double q = 1.0 / (2.0 * std::cos(std::numbers::pi * (2 * i + 1) / (2.0 * order)));
    const double norm = 1.0 / (1.0 + k / q + k2);
    Biquad s{};
    s.b0 = norm;
    s.b1 = -2.0 * norm;
    s.b2 = norm;
    s.a1 = 2.0 * (k2 - 1.0) * norm;
    s.a2 = (1.0 - k / q + k2) * norm;
    sections.push_back(s);
  }
  return sections;
}

double cascade_magnitude(const std::vector<Biquad>& sections, double freq_hz, double sample_rate) {
  const std::complex<double> z1 = std::polar(1.0, -2.0 * std::numbers::pi * freq_hz / sample_rate);
  const std::complex<double> z2 = z1 * z1;
  double mag = 1.0;
  for (const auto& s : sections) {
    mag *= std::abs((s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2));
  }
  return mag;
}

std::vector<double> filter_cascade(const std::vector<Biquad>& sections, const std::vector<double>& x) {
  std::vector<double> y = x;
  for (const auto& s : sections) {
    // Transposed direct form II.
    double z1 = 0.0, z2 = 0.0;
    for (auto& v : y) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
  }
  return y;
}

ImuStream highpass_filter(const ImuStream& imu, double cutoff_hz, int order) {
  const auto sections = butterworth_highpass(order, cutoff_hz, imu.sample_rate);
  ImuStream out;
  out.sample_rate = imu.sample_rate;
  for (const auto& axis : imu.samples) out.samples.push_back(filter_cascade(sections, axis));
  return out;
}

ImuStream select_axes(const ImuStream& imu, ImuMode mode) {
  if (mode == ImuMode::off) throw std::invalid_argument("select_axes: mode 'off' selects no axes");
  if (mode == ImuMode::all) return imu;
  if (imu.axes() != 6) throw std::invalid_argument("select_axes: accel/gyro selection needs a 6-axis stream");
  ImuStream out;
  out.sample_rate = imu.sample_rate;
  const std::size_t first = mode == ImuMode::accel ? 0 : 3;
  out.samples.assign(imu.samples.begin() + first, imu.samples.begin() + first + 3);
  return out;
}

ImuStream read_imu(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw DataError("IMU file not found: " + path.string());
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".wav") {
    const MultiChannelWave w = read_wave(path);
    if (w.channels() != 6) throw DataError(path.string() + ": IMU wave must have 6 channels");
    ImuStream imu;
    imu.sample_rate = w.sample_rate();
    for (std::size_t c = 0; c < 6; ++c) imu.samples.emplace_back(w.channel(c).begin(), w.channel(c).end());
    return imu;
  }

  std::ifstream in(path);
  if (!in) throw DataError("cannot open IMU file: " + path.string());
  ImuStream imu;
  imu.samples.assign(6, {});
  std::vector<double> stamps;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    std::vector<double> values;
    std::string tok;
    while (fields >> tok) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw DataError(path.string() + ":" + std::to_string(lineno) + ": non-numeric field '" + tok + "'");
      }
    }
    if (values.empty()) continue;
    if (values.size() != 7) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected 7 fields, got " +
                      std::to_string(values.size()));
    }
    if (!stamps.empty() && !(values[0] > stamps.back())) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": timestamps must increase");
    }
    stamps.push_back(values[0]);
    for (std::size_t a = 0; a < 6; ++a) imu.samples[a].push_back(values[a + 1]);
  }
  if (stamps.size() < 2) throw DataError(path.string() + ": IMU file needs at least two records");
  const double span_ms = stamps.back() - stamps.front();
  imu.sample_rate = std::round(1000.0 * double(stamps.size() - 1) / span_ms * 1e6) / 1e6;
  try {
    imu.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return imu;
}

std::size_t ImuEncoderConfig::stride_product() const {
  std::size_t p = 1;
  for (auto s : strides) p *= s;
  return p;
}

void ImuEncoderConfig::validate(double imu_rate) const {
  if (input_axes != 3 && input_axes != 6) throw std::invalid_argument("IMU encoder input_axes must be 3 or 6");
  if (width == 0 || kernel == 0) throw std::invalid_argument("IMU encoder width and kernel must be positive");
  for (auto s : strides) {
    if (s == 0) throw std::invalid_argument("IMU encoder strides must be positive");
  }
  if (!(frame_rate > 0.0)) throw std::invalid_argument("IMU encoder frame_rate must be positive");
  const double produced = imu_rate / double(stride_product());
  if (std::abs(produced - frame_rate) > 1e-9 * frame_rate) {
    throw std::invalid_argument("IMU stride product " + std::to_string(stride_product()) + " maps " +
                                std::to_string(imu_rate) + " Hz to " + std::to_string(produced) +
                                " Hz, not the audio frame rate " + std::to_string(frame_rate) + " Hz");
  }
}

MatrixF CausalConv1d::apply(const MatrixF& x) const {
  if (x.cols() != in) throw std::invalid_argument("CausalConv1d: input width mismatch");
  const std::size_t rows = x.rows() / stride;
  MatrixF y(rows, out);
  std::vector<float> window(kernel * in);
  for (std::size_t t = 0; t < rows; ++t) {
    const long last = static_cast<long>(stride * t + stride - 1);
    for (std::size_t m = 0; m < kernel; ++m) {
      const long j = last - static_cast<long>(m);
      float* dst = window.data() + m * in;
      if (j < 0) {
        std::fill(dst, dst + in, 0.0f);
      } else {
        const auto src = x.row(std::size_t(j));
        std::copy(src.begin(), src.end(), dst);
      }
    }
    kernels::gemv(weight, out, kernel * in, window, bias, y.row(t));
  }
  return y;
}

ImuEncoderParams ImuEncoderParams::shaped(const ImuEncoderConfig& c) {
  ImuEncoderParams p;
  p.stem = CausalConv1d(c.input_axes, c.width, c.kernel, 1);
  for (auto s : c.strides) {
    ImuResidualBlock b;
    b.conv1 = CausalConv1d(c.width, c.width, c.kernel, s);
    b.conv2 = CausalConv1d(c.width, c.width, c.kernel, 1);
    b.shortcut = CausalConv1d(c.width, c.width, 1, s);
    p.blocks.push_back(std::move(b));
  }
  return p;
}

ImuEncoderParams ImuEncoderParams::random(const ImuEncoderConfig& config, std::uint64_t seed) {
  ImuEncoderParams p = shaped(config);
  nn::RandomInit init(seed);
  p.visit("imu", init);
  return p;
}

ImuEncoderParams ImuEncoderParams::from_archive(const TensorArchive& archive, const ImuEncoderConfig& config,
                                                const std::string& prefix) {
  ImuEncoderParams p = shaped(config);
  nn::ArchiveReader reader{archive};
  p.visit(prefix, reader);
  return p;
}

void ImuEncoderParams::to_archive(TensorArchive& archive, const std::string& prefix) const {
  ImuEncoderParams copy = *this;
  nn::ArchiveWriter writer{archive};
  copy.visit(prefix, writer);
}

MatrixF encode_imu(const ImuStream& imu, const ImuEncoderConfig& config, const ImuEncoderParams& params) {
  imu.validate();
  config.validate(imu.sample_rate);
  if (imu.axes() != config.input_axes) {
    throw std::invalid_argument("IMU encoder expects " + std::to_string(config.input_axes) + " axes, got " +
                                std::to_string(imu.axes()));
  }
  if (params.blocks.size() != config.strides.size()) throw std::invalid_argument("IMU parameters do not match config");
  MatrixF x(imu.length(), imu.axes());
  for (std::size_t t = 0; t < imu.length(); ++t) {
    for (std::size_t a = 0; a < imu.axes(); ++a) x(t, a) = static_cast<float>(imu.samples[a][t]);
  }
  x = params.stem.apply(x);
  for (auto& v : x.data()) v = nn::relu(v);
  for (const auto& block : params.blocks) {
    MatrixF h = block.conv1.apply(x);
    for (auto& v : h.data()) v = nn::relu(v);
    h = block.conv2.apply(h);
    const MatrixF skip = block.shortcut.apply(x);
    for (std::size_t i = 0; i < h.data().size(); ++i) h.data()[i] = nn::relu(h.data()[i] + skip.data()[i]);
    x = std::move(h);
  }
  return x;
}

FusedFeatures fuse(const MatrixF& audio, const MatrixF& imu, double frame_hop) {
  const std::size_t n = audio.rows();
  const std::size_t diff = n > imu.rows() ? n - imu.rows() : imu.rows() - n;
  if (diff > 1) {
    throw std::invalid_argument("fuse: audio has " + std::to_string(n) + " frames but IMU has " +
                                std::to_string(imu.rows()));
  }
  const std::size_t da = audio.cols(), di = imu.cols();
  FusedFeatures out{MatrixF(n, da + di), frame_hop};
  for (std::size_t t = 0; t < n; ++t) {
    auto row = out.frames.row(t);
    std::copy(audio.row(t).begin(), audio.row(t).end(), row.begin());
    if (t < imu.rows()) std::copy(imu.row(t).begin(), imu.row(t).end(), row.begin() + da);
  }
  return out;
}

}  // namespace glassasr
