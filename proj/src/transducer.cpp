#include "glassasr/transducer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace glassasr {

Vocabulary::Vocabulary(std::vector<std::string> words) : tokens_{"<blank>", "<self>", "<other>"} {
  for (auto& w : words) {
    if (find(w)) throw std::invalid_argument("duplicate vocabulary entry '" + w + "'");
    tokens_.push_back(std::move(w));
  }
}

Vocabulary Vocabulary::synthetic(std::size_t size) {
  if (size < 3) throw std::invalid_argument("vocabulary needs at least blank and both speaker markers");
  std::vector<std::string> words;
  for (std::size_t i = 3; i < size; ++i) words.push_back("w" + std::to_string(i));
  return Vocabulary(std::move(words));
}

std::optional<std::size_t> Vocabulary::find(const std::string& text) const {
  auto it = std::find(tokens_.begin(), tokens_.end(), text);
  if (it == tokens_.end()) return std::nullopt;
  return std::size_t(it - tokens_.begin());
}

void DecoderConfig::validate() const {
  if (vocab_size < 3) throw std::invalid_argument("decoder vocab_size must be >= 3");
  if (embedding == 0 || pred_hidden == 0 || joint_hidden == 0 || encoder_dim == 0) {
    throw std::invalid_argument("decoder dimensions must be positive");
  }
  if (max_symbols_per_frame == 0) throw std::invalid_argument("decoder max_symbols_per_frame must be >= 1");
}

DecoderParams DecoderParams::shaped(const DecoderConfig& c) {
  c.validate();
  DecoderParams p;
  p.embedding.assign(c.vocab_size * c.embedding, 0.0f);
  p.rnn_input = nn::Linear(c.embedding, c.pred_hidden);
  p.rnn_recurrent = nn::Linear(c.pred_hidden, c.pred_hidden, false);
  p.joint_encoder = nn::Linear(c.encoder_dim, c.joint_hidden);
  p.joint_prediction = nn::Linear(c.pred_hidden, c.joint_hidden, false);
  p.joint_out = nn::Linear(c.joint_hidden, c.vocab_size);
  return p;
}

DecoderParams DecoderParams::random(const DecoderConfig& config, std::uint64_t seed) {
  DecoderParams p = shaped(config);
  nn::RandomInit init(seed);
  p.visit("decoder", init);
  return p;
}

DecoderParams DecoderParams::from_archive(const TensorArchive& archive, const DecoderConfig& config,
                                          const std::string& prefix) {
  DecoderParams p = shaped(config);
  nn::ArchiveReader reader{archive};
  p.visit(prefix, reader);
  return p;
}

void DecoderParams::to_archive(TensorArchive& archive, const std::string& prefix) const {
  DecoderParams copy = *this;
  nn::ArchiveWriter writer{archive};
  copy.visit(prefix, writer);
}

GreedyDecoder::GreedyDecoder(const DecoderConfig& config, const DecoderParams& params, const Vocabulary& vocab)
    : config_(config), params_(params), vocab_(vocab), state_(config.pred_hidden, 0.0f) {
  config.validate();
  if (vocab.size() != config.vocab_size) {
    throw std::invalid_argument("vocabulary has " + std::to_string(vocab.size()) + " entries, decoder expects " +
                                std::to_string(config.vocab_size));
  }
  advance(kBlankToken);
}

void GreedyDecoder::advance(std::size_t token) {
  const std::span<const float> emb(params_.embedding.data() + token * config_.embedding, config_.embedding);
  std::vector<float> a(config_.pred_hidden), r(config_.pred_hidden);
  params_.rnn_input.apply(emb, a);
  params_.rnn_recurrent.apply(state_, r);
  for (std::size_t i = 0; i < a.size(); ++i) state_[i] = std::tanh(a[i] + r[i]);
  pred_projection_.assign(config_.joint_hidden, 0.0f);
  params_.joint_prediction.apply(state_, pred_projection_);
}

std::vector<EmittedToken> GreedyDecoder::push(const MatrixF& frames, std::span<const double> frame_times) {
  if (frame_times.size() != frames.rows()) throw std::invalid_argument("one frame time per encoder frame required");
  if (frames.rows() > 0 && frames.cols() != config_.encoder_dim) {
    throw std::invalid_argument("encoder frame width does not match decoder encoder_dim");
  }
  std::vector<EmittedToken> out;
  std::vector<float> enc(config_.joint_hidden), hidden(config_.joint_hidden), logits(config_.vocab_size);
  for (std::size_t t = 0; t < frames.rows(); ++t) {
    if (frame_times[t] < last_time_) throw std::invalid_argument("frame times must be non-decreasing");
    last_time_ = frame_times[t];
    params_.joint_encoder.apply(frames.row(t), enc);
    for (std::size_t n = 0; n < config_.max_symbols_per_frame; ++n) {
      for (std::size_t i = 0; i < hidden.size(); ++i) hidden[i] = std::tanh(enc[i] + pred_projection_[i]);
      params_.joint_out.apply(hidden, logits);
      const std::size_t best = std::size_t(std::max_element(logits.begin(), logits.end()) - logits.begin());
      if (best == kBlankToken) break;
      if (best == kSelfMarker) {
        speaker_ = Speaker::self;
      } else if (best == kOtherMarker) {
        speaker_ = Speaker::other;
      } else {
        out.push_back({vocab_.token(best), speaker_, frame_times[t]});
      }
      advance(best);
    }
  }
  return out;
}

std::vector<EmittedToken> greedy_transducer_decode(const MatrixF& hidden, std::span<const double> frame_times,
                                                   const DecoderConfig& config, const DecoderParams& params,
                                                   const Vocabulary& vocab) {
  GreedyDecoder decoder(config, params, vocab);
  return decoder.push(hidden, frame_times);
}

}  // namespace glassasr
