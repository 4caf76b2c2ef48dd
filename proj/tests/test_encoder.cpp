#include <algorithm>
#include <set>

#include "doctest.h"
#include "glassasr/encoder.hpp"
#include "support.hpp"

using namespace glassasr;
using testsupport::max_abs_diff;
using testsupport::random_matrix;

namespace {

EncoderConfig small_config(std::size_t left, std::size_t right) {
  EncoderConfig c;
  c.input_dim = 12;
  c.layers = 2;
  c.hidden = 16;
  c.heads = 2;
  c.conv_kernel = 3;
  c.downsample_factor = 4;
  c.chunk_size = 3;
  c.att_context = {left, right};
  return c;
}

}  // namespace

TEST_CASE("chunk mask matches the per-cell rule") {
  for (std::size_t T : {1u, 5u, 8u, 13u, 32u}) {
    for (std::size_t cs : {1u, 2u, 3u, 8u}) {
      for (std::size_t left : {0u, 1u, 4u, 9u}) {
        for (std::size_t R : {0u, 1u, 3u}) {
          const auto mask = build_chunk_mask(T, cs, left, R);
          for (std::size_t i = 0; i < T; ++i) {
            for (std::size_t j = 0; j < T; ++j) REQUIRE(mask[i][j] == testsupport::mask_cell(i, j, T, cs, left, R));
          }
        }
      }
    }
  }
}

TEST_CASE("chunk mask worked example") {
  const auto mask = build_chunk_mask(8, 4, 4, 0);
  std::set<std::size_t> seen;
  for (std::size_t j = 0; j < 8; ++j) {
    if (mask[5][j]) seen.insert(j);
  }
  CHECK(seen == std::set<std::size_t>{1, 2, 3, 4, 5, 6, 7});
}

TEST_CASE("chunk mask with no context is block diagonal") {
  const auto mask = build_chunk_mask(9, 3, 0, 0);
  for (std::size_t i = 0; i < 9; ++i) {
    for (std::size_t j = 0; j < 9; ++j) CHECK(mask[i][j] == (i / 3 == j / 3));
  }
}

TEST_CASE("causal_conv") {
  const MatrixF x = random_matrix(20, 5, 1);
  SUBCASE("single tap identity") {
    CHECK(causal_conv(x, MatrixF(5, 1, 1.0f)) == x);
  }
  SUBCASE("three taps against a sliding window") {
    const MatrixF k = random_matrix(5, 3, 2);
    const MatrixF y = causal_conv(x, k);
    for (std::size_t t = 0; t < 20; ++t) {
      for (std::size_t d = 0; d < 5; ++d) {
        double s = 0.0;
        for (std::size_t j = 0; j < 3; ++j) {
          const long src = long(t) - 2 + long(j);
          if (src >= 0) s += double(k(d, j)) * x(std::size_t(src), d);
        }
        CHECK(std::abs(y(t, d) - s) <= 1e-6);
      }
    }
  }
  SUBCASE("future perturbation leaves the past unchanged") {
    const MatrixF k = random_matrix(5, 3, 3);
    MatrixF z = x;
    for (std::size_t d = 0; d < 5; ++d) z(12, d) += 1.0f;
    const MatrixF a = causal_conv(x, k), b = causal_conv(z, k);
    for (std::size_t t = 0; t < 12; ++t) {
      for (std::size_t d = 0; d < 5; ++d) CHECK(a(t, d) == b(t, d));
    }
  }
}

TEST_CASE("downsampling") {
  EncoderConfig c = small_config(8, 0);
  c.downsample_factor = 8;
  const auto p = EncoderParams::random(c, 5);
  CHECK(downsample(random_matrix(64, 12, 1), c, p).rows() == 8);
  CHECK(downsample(random_matrix(65, 12, 1), c, p).rows() == 9);

  // Past the zero-padded start every token sees only bias-driven activations.
  const MatrixF zero = downsample(MatrixF(64, 12), c, p);
  for (std::size_t t = 2; t < zero.rows(); ++t) CHECK(max_abs_diff(zero.slice_rows(t, t + 1), zero.slice_rows(1, 2)) == 0.0);

  const MatrixF x = random_matrix(64, 12, 2);
  MatrixF y = x;
  for (std::size_t d = 0; d < 12; ++d) y(40, d) -= 2.0f;
  const MatrixF a = downsample(x, c, p), b = downsample(y, c, p);
  for (std::size_t t = 0; t < 5; ++t) CHECK(max_abs_diff(a.slice_rows(t, t + 1), b.slice_rows(t, t + 1)) == 0.0);
  CHECK(max_abs_diff(a.slice_rows(5, 6), b.slice_rows(5, 6)) > 0.0);
}

TEST_CASE("offline encoder agrees with the plain-loop reference") {
  for (std::size_t R : {0u, 1u, 2u}) {
    const EncoderConfig c = small_config(5, R);
    const auto p = EncoderParams::random(c, 10 + R);
    const MatrixF x = random_matrix(53, 12, 20 + R);
    CHECK(max_abs_diff(encode_offline(x, c, p), testsupport::reference_encoder(x, c, p)) <= 1e-4);
  }
}

TEST_CASE("zero layers returns the downsampled input") {
  EncoderConfig c = small_config(4, 1);
  c.layers = 0;
  const auto p = EncoderParams::random(c, 1);
  const MatrixF x = random_matrix(30, 12, 1);
  CHECK(encode_offline(x, c, p) == downsample(x, c, p));
}

TEST_CASE("streaming reproduces offline encoding") {
  for (std::size_t R : {0u, 1u, 2u}) {
    for (std::size_t left : {0u, 2u, 7u}) {
      for (std::size_t T : {1u, 11u, 12u, 40u, 97u}) {
        const EncoderConfig c = small_config(left, R);
        const auto p = EncoderParams::random(c, 100 + T);
        const MatrixF x = random_matrix(T, 12, 200 + T + left);
        const auto trace = testsupport::run_streaming(x, MatrixF(), c, p);
        INFO("R=" << R << " left=" << left << " T=" << T);
        CHECK(max_abs_diff(trace.output, encode_offline(x, c, p)) <= 1e-5);
      }
    }
  }
}

TEST_CASE("streaming with fused aux features reproduces offline encoding") {
  EncoderConfig c = small_config(6, 1);
  c.aux_dim = 5;
  const auto p = EncoderParams::random(c, 9);
  for (long delta : {-1L, 0L, 1L}) {
    const MatrixF x = random_matrix(50, 12, 1);
    const std::size_t tokens = (50 + 3) / 4;
    const MatrixF aux = random_matrix(std::size_t(long(tokens) + delta), 5, 2);
    const auto trace = testsupport::run_streaming(x, aux, c, p);
    CHECK(max_abs_diff(trace.output, encode_offline(x, aux, c, p)) <= 1e-5);
  }
}

TEST_CASE("cache occupancy grows to the left context and saturates") {
  const EncoderConfig c = small_config(7, 0);
  const auto p = EncoderParams::random(c, 3);
  const auto trace = testsupport::run_streaming(random_matrix(120, 12, 4), MatrixF(), c, p);
  const std::size_t saturate = (7 + c.chunk_size - 1) / c.chunk_size + 1;
  for (std::size_t s = 0; s < trace.occupancy.size(); ++s) {
    CHECK(trace.occupancy[s] <= 7);
    if (s > 0) CHECK(trace.occupancy[s] >= trace.occupancy[s - 1]);
    if (s + 1 >= saturate) CHECK(trace.occupancy[s] == 7);
    CHECK(trace.elements[s] == c.layers * 1 * trace.occupancy[s] * c.hidden);
    CHECK(trace.conv_rows[s] == c.conv_kernel - 1);
  }
}

TEST_CASE("first step starts from an empty cache") {
  const EncoderConfig c = small_config(7, 1);
  EncoderCache cache(c);
  CHECK(cache.occupancy() == 0);
  CHECK(cache.attention_elements() == 0);
  const auto p = EncoderParams::random(c, 3);
  encode_streaming_step(random_matrix(c.chunk_frames(), 12, 1), cache, c, p);
  CHECK(cache.occupancy() == 0);  // look-ahead still pending
  CHECK(cache.pending_tokens() == c.chunk_size);
}

TEST_CASE("batched streams are independent") {
  const EncoderConfig c = small_config(5, 1);
  const auto p = EncoderParams::random(c, 4);
  const MatrixF a = random_matrix(48, 12, 1), b = random_matrix(48, 12, 2);
  EncoderCache cache(c, 2);
  MatrixF out_a(0, c.hidden), out_b(0, c.hidden);
  for (std::size_t pos = 0; pos < 48; pos += c.chunk_frames()) {
    const std::vector<MatrixF> chunks{a.slice_rows(pos, pos + 12), b.slice_rows(pos, pos + 12)};
    const auto out = encode_streaming_step(chunks, {}, cache, c, p, pos + 12 == 48);
    out_a.append_rows(out[0]);
    out_b.append_rows(out[1]);
  }
  CHECK(cache.attention_elements() == c.layers * 2 * cache.occupancy() * c.hidden);
  CHECK(max_abs_diff(out_a, encode_offline(a, c, p)) <= 1e-5);
  CHECK(max_abs_diff(out_b, encode_offline(b, c, p)) <= 1e-5);

  const std::vector<MatrixF> pair{a, a};
  const auto dup = encode_offline_batch(pair, c, p);
  CHECK(dup[0] == dup[1]);
}

TEST_CASE("streaming rejects bad input") {
  const EncoderConfig c = small_config(5, 1);
  const auto p = EncoderParams::random(c, 4);
  EncoderCache cache(c);
  CHECK_THROWS_AS(encode_streaming_step(random_matrix(5, 12, 1), cache, c, p), std::invalid_argument);
  EncoderConfig other = c;
  other.att_context.left_tokens = 9;
  CHECK_THROWS_AS(encode_streaming_step(random_matrix(12, 12, 1), cache, other, p), std::invalid_argument);
  encode_streaming_step(random_matrix(3, 12, 1), cache, c, p, true);
  CHECK_THROWS_AS(encode_streaming_step(random_matrix(3, 12, 1), cache, c, p, true), std::invalid_argument);
}

TEST_CASE("streaming causality within the look-ahead") {
  const EncoderConfig c = small_config(6, 1);
  const auto p = EncoderParams::random(c, 8);
  const MatrixF x = random_matrix(96, 12, 5);
  const auto base = testsupport::run_streaming(x, MatrixF(), c, p);
  const std::size_t cut_token = 9;
  const std::size_t first_future = (cut_token + 1 + lookahead_tokens(c)) * c.downsample_factor;
  MatrixF y = x;
  for (std::size_t t = first_future; t < y.rows(); ++t) {
    for (std::size_t d = 0; d < 12; ++d) y(t, d) = -y(t, d) + 3.0f;
  }
  const auto pert = testsupport::run_streaming(y, MatrixF(), c, p);
  // Token 9 is the first token of its chunk, the worst case for look-ahead.
  REQUIRE(cut_token % c.chunk_size == 0);
  for (std::size_t t = 0; t <= cut_token; ++t) {
    for (std::size_t d = 0; d < c.hidden; ++d) CHECK(base.output(t, d) == pert.output(t, d));
  }
}

TEST_CASE("look-ahead arithmetic") {
  EncoderConfig c;
  c.chunk_size = 1;
  c.att_context = {70, 0};
  CHECK(lookahead(c, 0.01) == 0.0);
  double prev = -1.0;
  for (std::size_t R : {1u, 4u, 6u, 13u, 20u, 21u}) {
    c.att_context.right_chunks = R;
    const double la = lookahead(c, 0.01);
    CHECK(la > prev);
    CHECK(lookahead(c, 0.02) == doctest::Approx(2.0 * la));
    prev = la;
  }
  EncoderConfig d;
  d.layers = 4;
  d.chunk_size = 8;
  d.downsample_factor = 8;
  d.att_context = {70, 1};
  CHECK(lookahead_tokens(d) == 7 + 4 * 8);
}

TEST_CASE("parameter archive round trip") {
  const EncoderConfig c = small_config(5, 1);
  const auto p = EncoderParams::random(c, 4);
  TensorArchive ar;
  p.to_archive(ar);
  const auto q = EncoderParams::from_archive(ar, c);
  const MatrixF x = random_matrix(24, 12, 1);
  CHECK(encode_offline(x, c, p) == encode_offline(x, c, q));
  EncoderConfig wider = c;
  wider.hidden = 20;
  CHECK_THROWS(EncoderParams::from_archive(ar, wider));
}
