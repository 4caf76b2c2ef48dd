#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>

#include "glassasr/evaluate.hpp"
#include "glassasr/random.hpp"

namespace testsupport {

using namespace glassasr;

MatrixF random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed, float scale) {
  Rng rng(seed);
  MatrixF m(rows, cols);
  for (auto& v : m.data()) v = scale * static_cast<float>(normal01(rng));
  return m;
}

double max_abs_diff(const MatrixF& a, const MatrixF& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return INFINITY;
  double d = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) d = std::max(d, double(std::abs(a.data()[i] - b.data()[i])));
  return d;
}

bool mask_cell(std::size_t i, std::size_t j, std::size_t frames, std::size_t chunk, std::size_t left,
               std::size_t right_chunks) {
  if (j >= frames) return false;
  const std::size_t ci = i / chunk, cj = j / chunk;
  if (cj >= ci && cj <= ci + right_chunks) return true;
  return cj < ci && i - j <= left;
}

StreamTrace run_streaming(const MatrixF& features, const MatrixF& aux, const EncoderConfig& config,
                          const EncoderParams& params) {
  EncoderCache cache(config);
  StreamTrace trace;
  trace.output = MatrixF(0, config.hidden);
  const std::size_t cf = config.chunk_frames();
  std::size_t pos = 0, tok = 0;
  while (true) {
    const std::size_t n = std::min(cf, features.rows() - pos);
    const bool last = pos + n >= features.rows();
    const MatrixF chunk = features.slice_rows(pos, pos + n);
    std::vector<MatrixF> aux_chunk;
    if (config.aux_dim > 0) {
      const std::size_t tokens = (n + config.downsample_factor - 1) / config.downsample_factor;
      const std::size_t end = last ? aux.rows() : std::min(aux.rows(), tok + tokens);
      aux_chunk.push_back(aux.slice_rows(std::min(tok, aux.rows()), end));
      tok += tokens;
    }
    const auto out = encode_streaming_step(std::span<const MatrixF>(&chunk, 1), aux_chunk, cache, config, params, last);
    trace.output.append_rows(out.front());
    trace.occupancy.push_back(cache.occupancy());
    trace.elements.push_back(cache.attention_elements());
    trace.conv_rows.push_back(cache.conv_cache_rows());
    trace.released_per_step.push_back(out.front().rows());
    pos += n;
    if (last) break;
  }
  return trace;
}

namespace {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;

Vec linear(const nn::Linear& l, const Vec& x) {
  Vec y(l.out);
  for (std::size_t o = 0; o < l.out; ++o) {
    double s = l.bias.empty() ? 0.0 : l.bias[o];
    for (std::size_t i = 0; i < l.in; ++i) s += double(l.weight[o * l.in + i]) * x[i];
    y[o] = s;
  }
  return y;
}

Vec layer_norm(const nn::LayerNorm& n, const Vec& x) {
  double mean = 0.0, var = 0.0;
  for (double v : x) mean += v;
  mean /= double(x.size());
  for (double v : x) var += (v - mean) * (v - mean);
  var /= double(x.size());
  Vec y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = (x[i] - mean) / std::sqrt(var + 1e-5) * n.gamma[i] + n.beta[i];
  return y;
}

double swish(double v) { return v / (1.0 + std::exp(-v)); }

Vec ffn_half(const nn::LayerNorm& n, const nn::Linear& a, const nn::Linear& b, const Vec& x) {
  Vec h = linear(a, layer_norm(n, x));
  for (auto& v : h) v = swish(v);
  Vec y = linear(b, h);
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + 0.5 * y[i];
  return y;
}

}  // namespace

MatrixF reference_encoder(const MatrixF& features, const EncoderConfig& cfg, const EncoderParams& params) {
  Mat x(features.rows());
  for (std::size_t t = 0; t < features.rows(); ++t) x[t].assign(features.row(t).begin(), features.row(t).end());
  for (const auto& st : params.subsampling) {
    Mat y((x.size() + 1) / 2, Vec(st.out));
    for (std::size_t t = 0; t < y.size(); ++t) {
      for (std::size_t o = 0; o < st.out; ++o) {
        double s = st.bias[o];
        for (std::size_t m = 0; m < st.kernel; ++m) {
          const long j = 2 * long(t) + 1 - long(m);
          if (j < 0 || j >= long(x.size())) continue;
          for (std::size_t i = 0; i < st.in; ++i) s += double(st.weight[(o * st.kernel + m) * st.in + i]) * x[j][i];
        }
        y[t][o] = std::max(0.0, s);
      }
    }
    x = std::move(y);
  }
  for (auto& row : x) row = linear(params.subsampling_out, row);

  const std::size_t T = x.size(), D = cfg.hidden, H = cfg.heads, hd = D / H, k = cfg.conv_kernel;
  for (const auto& P : params.layers) {
    Mat x1(T), a(T), q(T), kk(T), v(T);
    for (std::size_t t = 0; t < T; ++t) {
      x1[t] = ffn_half(P.ff1_norm, P.ff1_in, P.ff1_out, x[t]);
      a[t] = layer_norm(P.att_norm, x1[t]);
      q[t] = linear(P.query, a[t]);
      kk[t] = linear(P.key, a[t]);
      v[t] = linear(P.value, a[t]);
    }
    Mat x2(T);
    for (std::size_t i = 0; i < T; ++i) {
      Vec ctx(D, 0.0);
      for (std::size_t h = 0; h < H; ++h) {
        std::vector<double> w(T, 0.0);
        double peak = -INFINITY;
        for (std::size_t j = 0; j < T; ++j) {
          if (!mask_cell(i, j, T, cfg.chunk_size, cfg.att_context.left_tokens, cfg.att_context.right_chunks)) continue;
          double s = 0.0;
          for (std::size_t d = 0; d < hd; ++d) s += q[i][h * hd + d] * kk[j][h * hd + d];
          w[j] = s / std::sqrt(double(hd));
          peak = std::max(peak, w[j]);
        }
        double z = 0.0;
        for (std::size_t j = 0; j < T; ++j) {
          if (!mask_cell(i, j, T, cfg.chunk_size, cfg.att_context.left_tokens, cfg.att_context.right_chunks)) {
            w[j] = 0.0;
            continue;
          }
          w[j] = std::exp(w[j] - peak);
          z += w[j];
        }
        for (std::size_t j = 0; j < T; ++j) {
          for (std::size_t d = 0; d < hd; ++d) ctx[h * hd + d] += w[j] / z * v[j][h * hd + d];
        }
      }
      const Vec o = linear(P.att_out, ctx);
      x2[i].resize(D);
      for (std::size_t d = 0; d < D; ++d) x2[i][d] = x1[i][d] + o[d];
    }
    Mat glu(T, Vec(D));
    for (std::size_t t = 0; t < T; ++t) {
      const Vec g = linear(P.pointwise_in, layer_norm(P.conv_norm, x2[t]));
      for (std::size_t d = 0; d < D; ++d) glu[t][d] = g[d] / (1.0 + std::exp(-g[D + d]));
    }
    Mat out(T);
    for (std::size_t t = 0; t < T; ++t) {
      Vec c(D);
      for (std::size_t d = 0; d < D; ++d) {
        double s = P.depthwise_bias[d];
        for (std::size_t j = 0; j < k; ++j) {
          const long src = long(t) - long(k - 1) + long(j);
          if (src >= 0) s += double(P.depthwise[d * k + j]) * glu[src][d];
        }
        c[d] = s;
      }
      c = layer_norm(P.depthwise_norm, c);
      for (auto& e : c) e = swish(e);
      c = linear(P.pointwise_out, c);
      Vec x3(D);
      for (std::size_t d = 0; d < D; ++d) x3[d] = x2[t][d] + c[d];
      out[t] = layer_norm(P.out_norm, ffn_half(P.ff2_norm, P.ff2_in, P.ff2_out, x3));
    }
    x = std::move(out);
  }
  MatrixF result(T, D);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t d = 0; d < D; ++d) result(t, d) = float(x[t][d]);
  }
  return result;
}

double brute_force_alignment_cost(std::span<const WordRecord> ref, std::span<const EmittedToken> hyp,
                                  double attribution_cost) {
  double best = INFINITY;
  std::function<void(std::size_t, std::size_t, double)> walk = [&](std::size_t i, std::size_t j, double cost) {
    if (i == ref.size() && j == hyp.size()) {
      best = std::min(best, cost);
      return;
    }
    if (i < ref.size() && j < hyp.size()) {
      const std::string r = normalize_text(ref[i].text), h = normalize_text(hyp[j].token);
      const double c = r != h ? 1.0 : (ref[i].speaker == hyp[j].speaker ? 0.0 : attribution_cost);
      walk(i + 1, j + 1, cost + c);
    }
    if (i < ref.size()) walk(i + 1, j, cost + 1.0);
    if (j < hyp.size()) walk(i, j + 1, cost + 1.0);
  };
  walk(0, 0, 0.0);
  return best;
}

double butterworth_highpass_magnitude(double f, double cutoff, double rate, int order) {
  const double ratio = std::tan(std::numbers::pi * cutoff / rate) / std::tan(std::numbers::pi * f / rate);
  return 1.0 / std::sqrt(1.0 + std::pow(ratio, 2.0 * order));
}

double das_array_response(std::span<const Vec3> mics, const Vec3& steer, const Vec3& source, double freq,
                          double speed_of_sound) {
  std::complex<double> sum = 0.0;
  for (const auto& p : mics) {
    // Arrival advance of a plane wave from direction u at position p is p.u / c.
    const double phase = 2.0 * std::numbers::pi * freq * (dot(p, source) - dot(p, steer)) / speed_of_sound;
    sum += std::polar(1.0, phase);
  }
  return std::abs(sum);
}

double tone_amplitude(std::span<const double> x, double freq, double rate, std::size_t begin, std::size_t end) {
  double s = 0.0, c = 0.0;
  for (std::size_t n = begin; n < end; ++n) {
    const double ph = 2.0 * std::numbers::pi * freq * double(n) / rate;
    s += x[n] * std::sin(ph);
    c += x[n] * std::cos(ph);
  }
  return 2.0 * std::hypot(s, c) / double(end - begin);
}

}  // namespace testsupport
