#pragma once

// IMU preprocessing and fusion: causal high-pass filtering, axis selection,
// a strided causal residual 1-D conv encoder and per-frame concatenation
// with downsampled audio features.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "glassasr/matrix.hpp"
#include "glassasr/tensor_archive.hpp"

namespace glassasr {

struct ImuStream {
  std::vector<std::vector<double>> samples;  // [axis][time]; 6 axes = accel xyz, gyro xyz
  double sample_rate = 1000.0;

  std::size_t axes() const noexcept { return samples.size(); }
  std::size_t length() const noexcept { return samples.empty() ? 0 : samples.front().size(); }
  // Throws std::invalid_argument unless 3 or 6 equally long finite axes.
  void validate() const;
};

enum class ImuMode { accel, gyro, all, off };
ImuMode parse_imu_mode(std::string_view text);
std::string_view imu_mode_name(ImuMode mode);

// Second-order section, a0 normalized to 1.
struct Biquad {
  double b0, b1, b2, a1, a2;
};

// Butterworth high-pass of even order as cascaded biquads, bilinear transform
// with frequency prewarping so the -3 dB point lands exactly on cutoff.
std::vector<Biquad> butterworth_highpass(int order, double cutoff_hz, double sample_rate);

// |H(f)| of a biquad cascade evaluated on the unit circle.
double cascade_magnitude(const std::vector<Biquad>& sections, double freq_hz, double sample_rate);

// Zero-state causal filtering of one signal.
std::vector<double> filter_cascade(const std::vector<Biquad>& sections, const std::vector<double>& x);

// Per-axis 4th-order Butterworth high-pass. Throws std::invalid_argument
// unless 0 < cutoff < sample_rate / 2.
ImuStream highpass_filter(const ImuStream& imu, double cutoff_hz = 20.0, int order = 4);

// accel -> axes 0..2, gyro -> axes 3..5, all -> identity. Throws
// std::invalid_argument for `off` or for a 3-axis input asked for a subset.
ImuStream select_axes(const ImuStream& imu, ImuMode mode);

// Line records "timestamp_ms ax ay az gx gy gz" (comma or whitespace
// separated, '#' comments), or a 6-channel .wav file. Throws DataError.
ImuStream read_imu(const std::filesystem::path& path);

struct ImuEncoderConfig {
  std::size_t input_axes = 6;
  std::size_t width = 16;                    // output feature width D_imu
  std::size_t kernel = 3;
  std::vector<std::size_t> strides{2, 2, 4, 5};  // one residual block per stride
  double frame_rate = 12.5;                  // target feature rate, Hz

  std::size_t stride_product() const;
  // Throws std::invalid_argument if imu_rate / stride_product != frame_rate.
  void validate(double imu_rate) const;
  bool operator==(const ImuEncoderConfig&) const = default;
};

// Causal strided 1-D convolution: y[t] = b + sum_m W[m] x[s*t + s - 1 - m],
// floor(T / s) outputs, zero left padding.
struct CausalConv1d {
  std::size_t in = 0, out = 0, kernel = 1, stride = 1;
  std::vector<float> weight;  // [out][kernel][in]
  std::vector<float> bias;

  CausalConv1d() = default;
  CausalConv1d(std::size_t in_dim, std::size_t out_dim, std::size_t taps, std::size_t step)
      : in(in_dim), out(out_dim), kernel(taps), stride(step), weight(in_dim * out_dim * taps, 0.0f), bias(out_dim, 0.0f) {}

  MatrixF apply(const MatrixF& x) const;

  template <typename V>
  void visit(const std::string& name, V&& v) {
    v(name + ".weight", {out, kernel, in}, weight);
    v(name + ".bias", {out}, bias);
  }
};

struct ImuResidualBlock {
  CausalConv1d conv1;     // strided
  CausalConv1d conv2;
  CausalConv1d shortcut;  // 1 tap, strided

  template <typename V>
  void visit(const std::string& p, V&& v) {
    conv1.visit(p + ".conv1", v);
    conv2.visit(p + ".conv2", v);
    shortcut.visit(p + ".shortcut", v);
  }
};

struct ImuEncoderParams {
  CausalConv1d stem;
  std::vector<ImuResidualBlock> blocks;

  static ImuEncoderParams shaped(const ImuEncoderConfig& config);
  static ImuEncoderParams random(const ImuEncoderConfig& config, std::uint64_t seed);
  static ImuEncoderParams from_archive(const TensorArchive& archive, const ImuEncoderConfig& config,
                                       const std::string& prefix = "imu");
  void to_archive(TensorArchive& archive, const std::string& prefix = "imu") const;

  template <typename V>
  void visit(const std::string& p, V&& v) {
    stem.visit(p + ".stem", v);
    for (std::size_t i = 0; i < blocks.size(); ++i) blocks[i].visit(p + ".blocks." + std::to_string(i), v);
  }
};

// floor(T / stride_product) frames x width. Frame t depends only on samples
// < (t + 1) * stride_product.
MatrixF encode_imu(const ImuStream& imu, const ImuEncoderConfig& config, const ImuEncoderParams& params);

struct FusedFeatures {
  MatrixF frames;  // [time][D_audio + D_imu]
  double frame_hop = 0.0;
};

// Per-frame concatenation [audio | imu]. The IMU side is cropped or
// zero-padded by one frame to the audio length; a larger difference throws
// std::invalid_argument.
FusedFeatures fuse(const MatrixF& audio, const MatrixF& imu, double frame_hop = 0.0);

}  // namespace glassasr
