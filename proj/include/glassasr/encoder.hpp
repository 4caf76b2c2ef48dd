#pragma once

// Causal conformer-style encoder with chunk-aware attention masking and a
// cache that turns it into a step-wise recurrent model.
//
// Pipeline per stream: causal strided convolutional downsampling -> optional
// per-frame fusion with auxiliary (IMU) features -> L conformer blocks
// (pre-LayerNorm half-step FFN, masked multi-head self-attention, causal
// depthwise convolution module with LayerNorm, second half-step FFN, final
// LayerNorm). No input normalization and no BatchNorm anywhere.
//
// Streaming contract: concatenating encode_streaming_step outputs over a
// stream reproduces encode_offline on the whole stream. With right_chunks R
// > 0 the outputs for chunk s are released once chunk s + L*R has arrived.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "glassasr/matrix.hpp"
#include "glassasr/nn.hpp"
#include "glassasr/tensor_archive.hpp"

namespace glassasr {

struct AttentionContext {
  std::size_t left_tokens = 70;
  std::size_t right_chunks = 1;

  bool operator==(const AttentionContext&) const = default;
};

struct EncoderConfig {
  std::size_t input_dim = 80;  // per-frame feature width entering the downsampler
  std::size_t aux_dim = 0;     // fused per-token features after downsampling, 0 = none
  std::size_t layers = 4;
  std::size_t hidden = 32;
  std::size_t heads = 4;
  std::size_t conv_kernel = 3;
  std::size_t downsample_factor = 8;  // power of two; one stride-2 stage per factor of 2
  std::size_t subsampling_kernel = 3;
  std::size_t chunk_size = 8;  // tokens, after downsampling
  std::size_t ff_mult = 4;
  AttentionContext att_context;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
  std::size_t downsample_stages() const;
  std::size_t chunk_frames() const { return chunk_size * downsample_factor; }

  bool operator==(const EncoderConfig&) const = default;
};

// mask[i][j] is true iff token i may attend token j:
//   j lies in i's chunk or one of the next right_chunks chunks (clipped to T), or
//   j precedes i's chunk and i - j <= left_tokens.
std::vector<std::vector<bool>> build_chunk_mask(std::size_t frames, std::size_t chunk_size, std::size_t left_tokens,
                                                std::size_t right_chunks);

// Depthwise causal convolution, kernel [channel][tap]:
//   y[t][d] = sum_j kernel[d][j] * x[t - (k-1) + j][d],  x[<0] = 0.
MatrixF causal_conv(const MatrixF& x, const MatrixF& kernel);

struct ConvStage {
  std::size_t in = 0;
  std::size_t out = 0;
  std::size_t kernel = 0;
  std::vector<float> weight;  // [out][kernel][in]; tap m reads x[2t + 1 - m]
  std::vector<float> bias;

  template <typename V>
  void visit(const std::string& name, V&& v) {
    v(name + ".weight", {out, kernel, in}, weight);
    v(name + ".bias", {out}, bias);
  }
};

struct ConformerLayerParams {
  nn::LayerNorm ff1_norm;
  nn::Linear ff1_in, ff1_out;
  nn::LayerNorm att_norm;
  nn::Linear query, key, value, att_out;
  nn::LayerNorm conv_norm;
  nn::Linear pointwise_in;  // D -> 2D, gated by GLU
  std::vector<float> depthwise;  // [D][conv_kernel]
  std::vector<float> depthwise_bias;
  nn::LayerNorm depthwise_norm;
  nn::Linear pointwise_out;
  nn::LayerNorm ff2_norm;
  nn::Linear ff2_in, ff2_out;
  nn::LayerNorm out_norm;

  template <typename V>
  void visit(const std::string& p, V&& v) {
    ff1_norm.visit(p + ".ff1_norm", v);
    ff1_in.visit(p + ".ff1_in", v);
    ff1_out.visit(p + ".ff1_out", v);
    att_norm.visit(p + ".att_norm", v);
    query.visit(p + ".query", v);
    key.visit(p + ".key", v);
    value.visit(p + ".value", v);
    att_out.visit(p + ".att_out", v);
    conv_norm.visit(p + ".conv_norm", v);
    pointwise_in.visit(p + ".pointwise_in", v);
    v(p + ".depthwise.weight", {depthwise_bias.size(), depthwise.size() / std::max<std::size_t>(1, depthwise_bias.size())},
      depthwise);
    v(p + ".depthwise.bias", {depthwise_bias.size()}, depthwise_bias);
    depthwise_norm.visit(p + ".depthwise_norm", v);
    pointwise_out.visit(p + ".pointwise_out", v);
    ff2_norm.visit(p + ".ff2_norm", v);
    ff2_in.visit(p + ".ff2_in", v);
    ff2_out.visit(p + ".ff2_out", v);
    out_norm.visit(p + ".out_norm", v);
  }
};

struct EncoderParams {
  std::vector<ConvStage> subsampling;
  nn::Linear subsampling_out;  // (D or input_dim) -> D
  nn::Linear fusion;           // (D + aux_dim) -> D, present only with aux features
  std::vector<ConformerLayerParams> layers;

  // Zero-filled parameters shaped for config.
  static EncoderParams shaped(const EncoderConfig& config);
  static EncoderParams random(const EncoderConfig& config, std::uint64_t seed);
  static EncoderParams from_archive(const TensorArchive& archive, const EncoderConfig& config,
                                    const std::string& prefix = "encoder");
  void to_archive(TensorArchive& archive, const std::string& prefix = "encoder") const;

  // Throws std::invalid_argument if any tensor is mis-shaped for config.
  void check(const EncoderConfig& config) const;

  template <typename V>
  void visit(const std::string& p, V&& v) {
    for (std::size_t i = 0; i < subsampling.size(); ++i) subsampling[i].visit(p + ".subsampling." + std::to_string(i), v);
    subsampling_out.visit(p + ".subsampling_out", v);
    if (fusion.out > 0) fusion.visit(p + ".fusion", v);
    for (std::size_t i = 0; i < layers.size(); ++i) layers[i].visit(p + ".layers." + std::to_string(i), v);
  }
};

// Causal strided downsampling: ceil(T / factor) tokens of width hidden.
// Token t depends only on input frames < (t + 1) * factor.
MatrixF downsample(const MatrixF& features, const EncoderConfig& config, const EncoderParams& params);

// Full-sequence forward pass under build_chunk_mask. `aux` holds one row per
// token (a one-row length difference is cropped or zero-padded); pass an
// empty matrix when aux_dim == 0.
MatrixF encode_offline(const MatrixF& features, const MatrixF& aux, const EncoderConfig& config,
                       const EncoderParams& params);
MatrixF encode_offline(const MatrixF& features, const EncoderConfig& config, const EncoderParams& params);
std::vector<MatrixF> encode_offline_batch(std::span<const MatrixF> features, const EncoderConfig& config,
                                          const EncoderParams& params);

// Per-stream state for streaming inference over a batch of B streams that
// advance in lockstep. The attention cache of each layer holds the most
// recent C_mha <= L_c activations entering self-attention.
class EncoderCache {
 public:
  EncoderCache(const EncoderConfig& config, std::size_t batch = 1);

  std::size_t batch() const noexcept { return streams_.size(); }
  std::size_t layers() const noexcept { return layers_; }
  std::size_t hidden() const noexcept { return hidden_; }
  std::size_t left_context() const noexcept { return left_context_; }
  // C_mha: cached attention activations per layer and stream.
  std::size_t occupancy() const noexcept { return occupancy_; }
  // Total cached attention elements, L x B x C_mha x D when consistent.
  std::size_t attention_elements() const;
  std::size_t conv_cache_rows() const;
  std::size_t step_index() const noexcept { return step_index_; }
  std::size_t committed_tokens() const noexcept { return committed_; }
  // Tokens received but not yet released (look-ahead backlog).
  std::size_t pending_tokens() const;
  bool finished() const noexcept { return finished_; }

 private:
  friend std::vector<MatrixF> encode_streaming_step(std::span<const MatrixF>, std::span<const MatrixF>, EncoderCache&,
                                                    const EncoderConfig&, const EncoderParams&, bool);

  struct Stream {
    std::vector<MatrixF> subsampling_context;  // per stage, last inputs
    MatrixF pending;                           // fused tokens not yet released
    std::vector<MatrixF> attention;            // per layer, C_mha x D
    std::vector<MatrixF> conv;                 // per layer, <= k-1 depthwise inputs
  };

  EncoderConfig config_;
  std::size_t layers_;
  std::size_t hidden_;
  std::size_t left_context_;
  std::vector<Stream> streams_;
  std::size_t occupancy_ = 0;
  std::size_t committed_ = 0;
  std::size_t step_index_ = 0;
  bool finished_ = false;
};

// Feeds one chunk per stream (chunk_frames() input frames; the final chunk may
// be shorter) and returns the tokens released by this step for every stream,
// possibly none while look-ahead accumulates. `final_chunk` flushes the
// stream. `aux_chunks` is empty when aux_dim == 0.
// Throws std::invalid_argument on a cache/config mismatch or bad chunk shape.
std::vector<MatrixF> encode_streaming_step(std::span<const MatrixF> chunks, std::span<const MatrixF> aux_chunks,
                                           EncoderCache& cache, const EncoderConfig& config,
                                           const EncoderParams& params, bool final_chunk = false);
MatrixF encode_streaming_step(const MatrixF& chunk, EncoderCache& cache, const EncoderConfig& config,
                              const EncoderParams& params, bool final_chunk = false);

// Future tokens visible to the first token of a chunk once look-ahead
// compounds through every layer: (chunk_size - 1) + layers * R * chunk_size.
std::size_t lookahead_tokens(const EncoderConfig& config);

// Algorithmic look-ahead in seconds for input frames of frame_duration.
double lookahead(const EncoderConfig& config, double frame_duration);

}  // namespace glassasr
