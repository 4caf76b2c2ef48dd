#pragma once

// Toy transducer: embedding + tanh recurrent prediction network, additive
// joint network and frame-synchronous greedy decoding. Speaker markers in
// the vocabulary switch the speaker attributed to subsequent words.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "glassasr/matrix.hpp"
#include "glassasr/nn.hpp"
#include "glassasr/tensor_archive.hpp"
#include "glassasr/types.hpp"

namespace glassasr {

inline constexpr std::size_t kBlankToken = 0;
inline constexpr std::size_t kSelfMarker = 1;
inline constexpr std::size_t kOtherMarker = 2;

// id 0 = <blank>, 1 = <self>, 2 = <other>, then words.
class Vocabulary {
 public:
  explicit Vocabulary(std::vector<std::string> words);
  // Synthetic words "w3", "w4", ... up to size tokens in total.
  static Vocabulary synthetic(std::size_t size);

  std::size_t size() const noexcept { return tokens_.size(); }
  const std::string& token(std::size_t id) const { return tokens_.at(id); }
  std::optional<std::size_t> find(const std::string& text) const;

 private:
  std::vector<std::string> tokens_;
};

struct DecoderConfig {
  std::size_t vocab_size = 64;
  std::size_t embedding = 16;
  std::size_t pred_hidden = 32;
  std::size_t joint_hidden = 32;
  std::size_t encoder_dim = 32;
  std::size_t max_symbols_per_frame = 4;

  void validate() const;
  bool operator==(const DecoderConfig&) const = default;
};

struct DecoderParams {
  std::vector<float> embedding;  // [vocab][embedding]
  nn::Linear rnn_input;          // embedding -> pred_hidden
  nn::Linear rnn_recurrent;      // pred_hidden -> pred_hidden, bias-free
  nn::Linear joint_encoder;      // encoder_dim -> joint_hidden
  nn::Linear joint_prediction;   // pred_hidden -> joint_hidden, bias-free
  nn::Linear joint_out;          // joint_hidden -> vocab

  static DecoderParams shaped(const DecoderConfig& config);
  static DecoderParams random(const DecoderConfig& config, std::uint64_t seed);
  static DecoderParams from_archive(const TensorArchive& archive, const DecoderConfig& config,
                                    const std::string& prefix = "decoder");
  void to_archive(TensorArchive& archive, const std::string& prefix = "decoder") const;

  template <typename V>
  void visit(const std::string& p, V&& v) {
    v(p + ".embedding", {embedding.size() / std::max<std::size_t>(1, rnn_input.in), rnn_input.in}, embedding);
    rnn_input.visit(p + ".rnn_input", v);
    rnn_recurrent.visit(p + ".rnn_recurrent", v);
    joint_encoder.visit(p + ".joint_encoder", v);
    joint_prediction.visit(p + ".joint_prediction", v);
    joint_out.visit(p + ".joint_out", v);
  }
};

// Incremental greedy decoder. Feed encoder frames as they are released; each
// frame carries the wall time used as the emission time of its tokens.
class GreedyDecoder {
 public:
  // Throws std::invalid_argument if the vocabulary size differs from config.
  // `params` is referenced, not copied, and must outlive the decoder.
  GreedyDecoder(const DecoderConfig& config, const DecoderParams& params, const Vocabulary& vocab);

  // Decodes the rows of `frames`; frame_times[i] belongs to row i.
  // Throws std::invalid_argument on a size mismatch or decreasing times.
  std::vector<EmittedToken> push(const MatrixF& frames, std::span<const double> frame_times);

  Speaker speaker() const noexcept { return speaker_; }

 private:
  void advance(std::size_t token);

  DecoderConfig config_;
  const DecoderParams& params_;
  Vocabulary vocab_;
  std::vector<float> state_;
  std::vector<float> pred_projection_;
  Speaker speaker_ = Speaker::self;
  double last_time_ = -1e300;
};

std::vector<EmittedToken> greedy_transducer_decode(const MatrixF& hidden, std::span<const double> frame_times,
                                                   const DecoderConfig& config, const DecoderParams& params,
                                                   const Vocabulary& vocab);

}  // namespace glassasr
