#include "glassasr/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "glassasr/error.hpp"
#include "glassasr/imu.hpp"
#include "glassasr/kernels.hpp"

namespace glassasr {

void EncoderConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument(what); };
  if (input_dim == 0) fail("input_dim must be positive");
  if (hidden == 0 || heads == 0) fail("hidden and heads must be positive");
  if (hidden % heads != 0) fail("hidden must be divisible by heads");
  if (conv_kernel == 0) fail("conv_kernel must be >= 1");
  if (downsample_factor == 0 || (downsample_factor & (downsample_factor - 1)) != 0) {
    fail("downsample_factor must be a power of two");
  }
  if (downsample_factor > 1 && subsampling_kernel < 2) fail("subsampling_kernel must be >= 2");
  if (chunk_size == 0) fail("chunk_size must be >= 1");
  if (ff_mult == 0) fail("ff_mult must be >= 1");
}

std::size_t EncoderConfig::downsample_stages() const {
  std::size_t stages = 0;
  for (std::size_t f = downsample_factor; f > 1; f >>= 1) ++stages;
  return stages;
}

std::vector<std::vector<bool>> build_chunk_mask(std::size_t frames, std::size_t chunk_size, std::size_t left_tokens,
                                                std::size_t right_chunks) {
  if (chunk_size == 0) throw std::invalid_argument("build_chunk_mask: chunk_size must be >= 1");
  std::vector<std::vector<bool>> mask(frames, std::vector<bool>(frames, false));
  for (std::size_t i = 0; i < frames; ++i) {
    const std::size_t start = (i / chunk_size) * chunk_size;
    const std::size_t end = std::min(frames, start + (right_chunks + 1) * chunk_size);
    const std::size_t left = i > left_tokens ? i - left_tokens : 0;
    for (std::size_t j = std::min(start, left); j < end; ++j) mask[i][j] = true;
  }
  return mask;
}

namespace {

// Depthwise causal convolution of x (rows = time) with `history` rows
// preceding x[0]; missing history reads as zero.
MatrixF depthwise_causal(const MatrixF& x, const MatrixF& history, std::span<const float> kernel, std::size_t taps,
                         std::span<const float> bias) {
  const std::size_t dim = x.cols();
  MatrixF y(x.rows(), dim);
  const long hist = static_cast<long>(history.rows());
  for (std::size_t t = 0; t < x.rows(); ++t) {
    auto out = y.row(t);
    for (std::size_t d = 0; d < dim; ++d) out[d] = bias.empty() ? 0.0f : bias[d];
    for (std::size_t j = 0; j < taps; ++j) {
      const long src = static_cast<long>(t) - static_cast<long>(taps - 1) + static_cast<long>(j);
      std::span<const float> in;
      if (src >= 0) {
        in = x.row(std::size_t(src));
      } else if (hist + src >= 0) {
        in = history.row(std::size_t(hist + src));
      } else {
        continue;
      }
      for (std::size_t d = 0; d < dim; ++d) out[d] += kernel[d * taps + j] * in[d];
    }
  }
  return y;
}

void keep_last_rows(MatrixF& m, std::size_t n) {
  if (m.rows() > n) m.drop_front_rows(m.rows() - n);
}

void append_first_rows(MatrixF& dst, const MatrixF& src, std::size_t n, std::size_t keep) {
  if (dst.cols() == 0 && dst.rows() == 0) dst = MatrixF(0, src.cols());
  dst.append_rows(src.slice_rows(0, std::min(n, src.rows())));
  keep_last_rows(dst, keep);
}

// Stride-2 causal convolution of new rows x (x[0] at an even global index)
// with preceding `context` rows, followed by ReLU.
MatrixF conv_stage_forward(const ConvStage& st, const MatrixF& context, const MatrixF& x) {
  const std::size_t rows = (x.rows() + 1) / 2;
  MatrixF y(rows, st.out);
  std::vector<float> window(st.kernel * st.in);
  const long ctx = static_cast<long>(context.rows());
  for (std::size_t t = 0; t < rows; ++t) {
    for (std::size_t m = 0; m < st.kernel; ++m) {
      const long j = 2 * static_cast<long>(t) + 1 - static_cast<long>(m);
      float* dst = window.data() + m * st.in;
      if (j >= static_cast<long>(x.rows()) || (j < 0 && ctx + j < 0)) {
        std::fill(dst, dst + st.in, 0.0f);
      } else {
        const auto src = j >= 0 ? x.row(std::size_t(j)) : context.row(std::size_t(ctx + j));
        std::copy(src.begin(), src.end(), dst);
      }
    }
    auto out = y.row(t);
    kernels::gemv(st.weight, st.out, st.kernel * st.in, window, st.bias, out);
    for (auto& v : out) v = nn::relu(v);
  }
  return y;
}

MatrixF subsample_tail(const MatrixF& stage_out, const EncoderParams& params) {
  return params.subsampling_out.apply(stage_out);
}

MatrixF fuse_tokens(const MatrixF& tokens, const MatrixF& aux, const EncoderConfig& config, const EncoderParams& params) {
  if (config.aux_dim == 0) {
    if (!aux.empty()) throw std::invalid_argument("encoder configured without aux features but aux given");
    return tokens;
  }
  if (aux.cols() != config.aux_dim) throw std::invalid_argument("aux feature width does not match aux_dim");
  return params.fusion.apply(fuse(tokens, aux).frames);
}

struct LayerWork {
  MatrixF output;            // out_rows x D
  MatrixF attention_inputs;  // x.rows() x D
  MatrixF depthwise_inputs;  // out_rows x D
};

MatrixF feed_forward(const MatrixF& x, const nn::LayerNorm& norm, const nn::Linear& in, const nn::Linear& out) {
  MatrixF h = in.apply(norm.apply(x));
  for (auto& v : h.data()) v = nn::swish(v);
  MatrixF y = out.apply(h);
  for (std::size_t i = 0; i < y.data().size(); ++i) y.data()[i] = x.data()[i] + 0.5f * y.data()[i];
  return y;
}

// One conformer block. x holds tokens at global positions [p0, p0 + x.rows());
// only the first out_rows outputs are produced. att_cache / conv_cache hold
// the attention and depthwise inputs of the tokens preceding p0.
LayerWork conformer_layer(const ConformerLayerParams& P, const EncoderConfig& cfg, const MatrixF& x, std::size_t p0,
                          std::size_t out_rows, const MatrixF& att_cache, const MatrixF& conv_cache) {
  const std::size_t dim = cfg.hidden;
  const std::size_t heads = cfg.heads;
  const std::size_t head_dim = dim / heads;
  const std::size_t cs = cfg.chunk_size;
  const std::size_t cached = att_cache.rows();
  const std::size_t visible_end = p0 + x.rows();
  const float scale = 1.0f / std::sqrt(float(head_dim));

  LayerWork work;
  const MatrixF x1 = feed_forward(x, P.ff1_norm, P.ff1_in, P.ff1_out);
  work.attention_inputs = P.att_norm.apply(x1);

  // Keys and values over [cache | current]; index 0 is global p0 - cached.
  MatrixF kv_source(0, dim);
  if (cached > 0) kv_source.append_rows(att_cache);
  kv_source.append_rows(work.attention_inputs);
  const MatrixF keys = P.key.apply(kv_source);
  const MatrixF values = P.value.apply(kv_source);
  const std::size_t base = p0 - cached;

  MatrixF x2(out_rows, dim);
  std::vector<float> query(dim), context(dim), scores, projected(dim);
  for (std::size_t r = 0; r < out_rows; ++r) {
    const std::size_t g = p0 + r;
    const std::size_t start = (g / cs) * cs;
    const std::size_t left = g > cfg.att_context.left_tokens ? g - cfg.att_context.left_tokens : 0;
    const std::size_t lo = std::min(start, left);
    const std::size_t hi = std::min(visible_end, start + (cfg.att_context.right_chunks + 1) * cs);
    if (lo < base) throw std::logic_error("attention window reaches past the cache");
    P.query.apply(work.attention_inputs.row(r), query);
    std::fill(context.begin(), context.end(), 0.0f);
    scores.resize(hi - lo);
    for (std::size_t h = 0; h < heads; ++h) {
      const std::size_t off = h * head_dim;
      const std::span<const float> q(query.data() + off, head_dim);
      float peak = -INFINITY;
      for (std::size_t j = lo; j < hi; ++j) {
        const float s = kernels::dot(q, keys.row(j - base).subspan(off, head_dim)) * scale;
        scores[j - lo] = s;
        peak = std::max(peak, s);
      }
      float norm = 0.0f;
      for (auto& s : scores) {
        s = std::exp(s - peak);
        norm += s;
      }
      const std::span<float> ctx(context.data() + off, head_dim);
      for (std::size_t j = lo; j < hi; ++j) {
        kernels::axpy(scores[j - lo] / norm, values.row(j - base).subspan(off, head_dim), ctx);
      }
    }
    P.att_out.apply(context, projected);
    auto dst = x2.row(r);
    const auto src = x1.row(r);
    for (std::size_t d = 0; d < dim; ++d) dst[d] = src[d] + projected[d];
  }

  // Convolution module.
  const MatrixF gated = P.pointwise_in.apply(P.conv_norm.apply(x2));
  work.depthwise_inputs = MatrixF(out_rows, dim);
  for (std::size_t r = 0; r < out_rows; ++r) {
    const auto g = gated.row(r);
    auto u = work.depthwise_inputs.row(r);
    for (std::size_t d = 0; d < dim; ++d) u[d] = g[d] / (1.0f + std::exp(-g[dim + d]));
  }
  MatrixF conv = depthwise_causal(work.depthwise_inputs, conv_cache, P.depthwise, cfg.conv_kernel, P.depthwise_bias);
  conv = P.depthwise_norm.apply(conv);
  for (auto& v : conv.data()) v = nn::swish(v);
  conv = P.pointwise_out.apply(conv);
  MatrixF x3 = x2;
  for (std::size_t i = 0; i < x3.data().size(); ++i) x3.data()[i] += conv.data()[i];

  work.output = P.out_norm.apply(feed_forward(x3, P.ff2_norm, P.ff2_in, P.ff2_out));
  return work;
}

}  // namespace

MatrixF causal_conv(const MatrixF& x, const MatrixF& kernel) {
  if (kernel.rows() != x.cols()) throw std::invalid_argument("causal_conv: kernel rows must equal channel count");
  if (kernel.cols() == 0) throw std::invalid_argument("causal_conv: kernel needs at least one tap");
  return depthwise_causal(x, MatrixF(0, x.cols()), kernel.data(), kernel.cols(), {});
}

// ---------------------------------------------------------------------------
// Parameters

EncoderParams EncoderParams::shaped(const EncoderConfig& c) {
  c.validate();
  EncoderParams p;
  std::size_t width = c.input_dim;
  for (std::size_t s = 0; s < c.downsample_stages(); ++s) {
    ConvStage st{width, c.hidden, c.subsampling_kernel, {}, {}};
    st.weight.assign(st.out * st.kernel * st.in, 0.0f);
    st.bias.assign(st.out, 0.0f);
    p.subsampling.push_back(std::move(st));
    width = c.hidden;
  }
  p.subsampling_out = nn::Linear(width, c.hidden);
  if (c.aux_dim > 0) p.fusion = nn::Linear(c.hidden + c.aux_dim, c.hidden);
  const std::size_t d = c.hidden;
  const std::size_t ff = c.hidden * c.ff_mult;
  for (std::size_t l = 0; l < c.layers; ++l) {
    ConformerLayerParams L;
    L.ff1_norm = nn::LayerNorm(d);
    L.ff1_in = nn::Linear(d, ff);
    L.ff1_out = nn::Linear(ff, d);
    L.att_norm = nn::LayerNorm(d);
    L.query = nn::Linear(d, d);
    L.key = nn::Linear(d, d);
    L.value = nn::Linear(d, d);
    L.att_out = nn::Linear(d, d);
    L.conv_norm = nn::LayerNorm(d);
    L.pointwise_in = nn::Linear(d, 2 * d);
    L.depthwise.assign(d * c.conv_kernel, 0.0f);
    L.depthwise_bias.assign(d, 0.0f);
    L.depthwise_norm = nn::LayerNorm(d);
    L.pointwise_out = nn::Linear(d, d);
    L.ff2_norm = nn::LayerNorm(d);
    L.ff2_in = nn::Linear(d, ff);
    L.ff2_out = nn::Linear(ff, d);
    L.out_norm = nn::LayerNorm(d);
    p.layers.push_back(std::move(L));
  }
  return p;
}

EncoderParams EncoderParams::random(const EncoderConfig& config, std::uint64_t seed) {
  EncoderParams p = shaped(config);
  nn::RandomInit init(seed);
  p.visit("encoder", init);
  return p;
}

EncoderParams EncoderParams::from_archive(const TensorArchive& archive, const EncoderConfig& config,
                                          const std::string& prefix) {
  EncoderParams p = shaped(config);
  nn::ArchiveReader reader{archive};
  p.visit(prefix, reader);
  return p;
}

void EncoderParams::to_archive(TensorArchive& archive, const std::string& prefix) const {
  EncoderParams copy = *this;
  nn::ArchiveWriter writer{archive};
  copy.visit(prefix, writer);
}

void EncoderParams::check(const EncoderConfig& config) const {
  const EncoderParams expected = shaped(config);
  TensorArchive want, have;
  expected.to_archive(want);
  to_archive(have);
  if (want.size() != have.size()) throw std::invalid_argument("encoder parameters do not match config (tensor count)");
  for (const auto& [name, t] : want) {
    auto it = have.find(name);
    if (it == have.end() || it->second.shape != t.shape || it->second.values.size() != t.values.size()) {
      throw std::invalid_argument("encoder parameter '" + name + "' does not match config");
    }
  }
}

// ---------------------------------------------------------------------------
// Offline path

MatrixF downsample(const MatrixF& features, const EncoderConfig& config, const EncoderParams& params) {
  if (features.cols() != config.input_dim) {
    throw std::invalid_argument("encoder input width " + std::to_string(features.cols()) + " != input_dim " +
                                std::to_string(config.input_dim));
  }
  MatrixF x = features;
  for (const auto& st : params.subsampling) x = conv_stage_forward(st, MatrixF(0, x.cols()), x);
  return subsample_tail(x, params);
}

MatrixF encode_offline(const MatrixF& features, const MatrixF& aux, const EncoderConfig& config,
                       const EncoderParams& params) {
  config.validate();
  if (params.layers.size() != config.layers) throw std::invalid_argument("encoder parameters do not match config");
  MatrixF x = fuse_tokens(downsample(features, config, params), aux, config, params);
  const MatrixF none(0, config.hidden);
  for (const auto& layer : params.layers) x = conformer_layer(layer, config, x, 0, x.rows(), none, none).output;
  return x;
}

MatrixF encode_offline(const MatrixF& features, const EncoderConfig& config, const EncoderParams& params) {
  return encode_offline(features, MatrixF(), config, params);
}

std::vector<MatrixF> encode_offline_batch(std::span<const MatrixF> features, const EncoderConfig& config,
                                          const EncoderParams& params) {
  std::vector<MatrixF> out;
  out.reserve(features.size());
  for (const auto& f : features) out.push_back(encode_offline(f, config, params));
  return out;
}

// ---------------------------------------------------------------------------
// Streaming path

EncoderCache::EncoderCache(const EncoderConfig& config, std::size_t batch)
    : config_(config), layers_(config.layers), hidden_(config.hidden), left_context_(config.att_context.left_tokens) {
  config.validate();
  if (batch == 0) throw std::invalid_argument("EncoderCache: batch must be >= 1");
  streams_.resize(batch);
  for (auto& s : streams_) {
    s.subsampling_context.assign(config.downsample_stages(), MatrixF());
    std::size_t width = config.input_dim;
    for (auto& ctx : s.subsampling_context) {
      ctx = MatrixF(0, width);
      width = config.hidden;
    }
    s.pending = MatrixF(0, config.hidden);
    s.attention.assign(layers_, MatrixF(0, hidden_));
    s.conv.assign(layers_, MatrixF(0, hidden_));
  }
}

std::size_t EncoderCache::attention_elements() const {
  std::size_t n = 0;
  for (const auto& s : streams_) {
    for (const auto& a : s.attention) n += a.rows() * a.cols();
  }
  return n;
}

std::size_t EncoderCache::conv_cache_rows() const {
  return streams_.empty() || streams_.front().conv.empty() ? 0 : streams_.front().conv.front().rows();
}

std::size_t EncoderCache::pending_tokens() const { return streams_.empty() ? 0 : streams_.front().pending.rows(); }

std::vector<MatrixF> encode_streaming_step(std::span<const MatrixF> chunks, std::span<const MatrixF> aux_chunks,
                                           EncoderCache& cache, const EncoderConfig& config,
                                           const EncoderParams& params, bool final_chunk) {
  if (!(cache.config_ == config)) throw std::invalid_argument("encoder cache was built for a different config");
  if (params.layers.size() != config.layers) throw std::invalid_argument("encoder parameters do not match config");
  if (cache.finished_) throw std::invalid_argument("stream already finished");
  if (chunks.size() != cache.batch()) throw std::invalid_argument("chunk count does not match cache batch size");
  if (config.aux_dim > 0 ? aux_chunks.size() != chunks.size() : !aux_chunks.empty()) {
    throw std::invalid_argument("aux chunk count does not match configuration");
  }
  const std::size_t frames = chunks.front().rows();
  for (const auto& c : chunks) {
    if (c.rows() != frames) throw std::invalid_argument("streams in a batch must receive equally long chunks");
    if (c.rows() > 0 && c.cols() != config.input_dim) throw std::invalid_argument("chunk width does not match input_dim");
  }
  if (final_chunk ? frames > config.chunk_frames() : frames != config.chunk_frames()) {
    throw std::invalid_argument("chunk must hold " + std::to_string(config.chunk_frames()) +
                                " input frames (fewer only for the final chunk), got " + std::to_string(frames));
  }

  const std::size_t cs = config.chunk_size;
  const std::size_t lookahead_rows = (1 + config.layers * config.att_context.right_chunks) * cs;
  const std::size_t keep_sub = config.subsampling_kernel > 0 ? config.subsampling_kernel - 1 : 0;
  const std::size_t keep_conv = config.conv_kernel - 1;
  std::vector<MatrixF> released(cache.batch(), MatrixF(0, config.hidden));
  std::size_t committed = cache.committed_;

  for (std::size_t b = 0; b < cache.batch(); ++b) {
    auto& st = cache.streams_[b];
    if (frames > 0) {
      MatrixF x = chunks[b];
      for (std::size_t s = 0; s < params.subsampling.size(); ++s) {
        MatrixF y = conv_stage_forward(params.subsampling[s], st.subsampling_context[s], x);
        st.subsampling_context[s].append_rows(x);
        keep_last_rows(st.subsampling_context[s], keep_sub);
        x = std::move(y);
      }
      MatrixF tokens = subsample_tail(x, params);
      if (config.aux_dim > 0 && !final_chunk && aux_chunks[b].rows() != tokens.rows()) {
        throw std::invalid_argument("aux chunk must hold one row per token");
      }
      st.pending.append_rows(fuse_tokens(tokens, config.aux_dim > 0 ? aux_chunks[b] : MatrixF(), config, params));
    }

    committed = cache.committed_;
    while (st.pending.rows() >= lookahead_rows || (final_chunk && st.pending.rows() > 0)) {
      const std::size_t commit = std::min(cs, st.pending.rows());
      MatrixF x = st.pending.slice_rows(0, std::min(st.pending.rows(), lookahead_rows));
      for (std::size_t l = 0; l < config.layers; ++l) {
        const std::size_t want =
            std::min(x.rows(), (1 + (config.layers - 1 - l) * config.att_context.right_chunks) * cs);
        LayerWork work = conformer_layer(params.layers[l], config, x, committed, want, st.attention[l], st.conv[l]);
        append_first_rows(st.attention[l], work.attention_inputs, commit, config.att_context.left_tokens);
        append_first_rows(st.conv[l], work.depthwise_inputs, commit, keep_conv);
        x = std::move(work.output);
      }
      released[b].append_rows(x.slice_rows(0, commit));
      st.pending.drop_front_rows(commit);
      committed += commit;
    }
  }

  cache.committed_ = committed;
  cache.occupancy_ = std::min(config.att_context.left_tokens, committed);
  ++cache.step_index_;
  if (final_chunk) cache.finished_ = true;
  return released;
}

MatrixF encode_streaming_step(const MatrixF& chunk, EncoderCache& cache, const EncoderConfig& config,
                              const EncoderParams& params, bool final_chunk) {
  auto out = encode_streaming_step(std::span<const MatrixF>(&chunk, 1), {}, cache, config, params, final_chunk);
  return std::move(out.front());
}

std::size_t lookahead_tokens(const EncoderConfig& config) {
  return (config.chunk_size - 1) + config.layers * config.att_context.right_chunks * config.chunk_size;
}

double lookahead(const EncoderConfig& config, double frame_duration) {
  return double(lookahead_tokens(config)) * double(config.downsample_factor) * frame_duration;
}

}  // namespace glassasr
