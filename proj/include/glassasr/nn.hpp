#pragma once

// Minimal float building blocks shared by the audio encoder, the IMU encoder
// and the transducer decoder. Parameters are plain vectors; each parameter
// struct exposes visit(prefix, visitor) so random initialization and archive
// I/O are written once.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "glassasr/matrix.hpp"
#include "glassasr/random.hpp"
#include "glassasr/tensor_archive.hpp"

namespace glassasr::nn {

struct Linear {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<float> weight;  // [out][in]
  std::vector<float> bias;    // [out], empty when bias-free

  Linear() = default;
  Linear(std::size_t in_dim, std::size_t out_dim, bool with_bias = true)
      : in(in_dim), out(out_dim), weight(in_dim * out_dim, 0.0f), bias(with_bias ? out_dim : 0, 0.0f) {}

  void apply(std::span<const float> x, std::span<float> y) const;
  MatrixF apply(const MatrixF& x) const;

  template <typename V>
  void visit(const std::string& name, V&& v) {
    v(name + ".weight", {out, in}, weight);
    if (!bias.empty()) v(name + ".bias", {out}, bias);
  }
};

struct LayerNorm {
  std::vector<float> gamma;
  std::vector<float> beta;

  LayerNorm() = default;
  explicit LayerNorm(std::size_t dim) : gamma(dim, 1.0f), beta(dim, 0.0f) {}

  void apply_inplace(std::span<float> x) const;
  MatrixF apply(const MatrixF& x) const;

  template <typename V>
  void visit(const std::string& name, V&& v) {
    v(name + ".gamma", {gamma.size()}, gamma);
    v(name + ".beta", {beta.size()}, beta);
  }
};

inline float swish(float x) { return x / (1.0f + std::exp(-x)); }
inline float relu(float x) { return x > 0.0f ? x : 0.0f; }

// Weights ~ N(0, 1/fan_in), biases and LayerNorm shifts ~ N(0, bias_scale^2),
// LayerNorm gains = 1.
struct RandomInit {
  Rng rng;
  float bias_scale = 0.1f;

  explicit RandomInit(std::uint64_t seed) : rng(seed) {}
  void operator()(const std::string& name, const std::vector<std::size_t>& shape, std::vector<float>& values);
};

struct ArchiveWriter {
  TensorArchive& archive;
  void operator()(const std::string& name, const std::vector<std::size_t>& shape, std::vector<float>& values);
};

// Throws DataError on a missing tensor or a shape mismatch.
struct ArchiveReader {
  const TensorArchive& archive;
  void operator()(const std::string& name, const std::vector<std::size_t>& shape, std::vector<float>& values);
};

}  // namespace glassasr::nn
