#include <atomic>
#include <stdexcept>

#include "doctest.h"
#include "glassasr/pipeline.hpp"
#include "support.hpp"

using namespace glassasr;

namespace {

PipelineConfig small_pipeline() {
  PipelineConfig cfg = default_config();
  cfg.encoder.input_dim = 20;
  cfg.encoder.att_context = {16, 1};
  cfg.derive();
  cfg.encoder.input_dim = 20;
  return cfg;
}

}  // namespace

TEST_CASE("streaming recognition matches offline encoding and decoding") {
  const PipelineConfig cfg = small_pipeline();
  const StreamingModel model = random_model(cfg, 3);
  const MatrixF x = testsupport::random_matrix(300, 20, 8);
  StreamTiming timing;
  timing.audio_duration = 3.015;  // 300 frames of 25 ms every 10 ms
  timing.arrival_chunk = 0.2;
  const auto out = stream_recognize(x, MatrixF(), model, timing);

  const MatrixF offline = encode_offline(x, model.encoder_config, model.encoder);
  CHECK(testsupport::max_abs_diff(out.hidden, offline) <= 1e-5);

  // Same tokens as decoding the offline frames with the per-step times.
  std::vector<double> times;
  double last = 0.0;
  for (const auto& s : out.steps) {
    CHECK(s.wall_time >= last);
    CHECK(s.wall_time <= 3.015 + 1e-12);
    last = s.wall_time;
    times.insert(times.end(), s.released, s.wall_time);
  }
  REQUIRE(times.size() == offline.rows());
  const auto ref = greedy_transducer_decode(offline, times, model.decoder_config, model.decoder, model.vocab);
  REQUIRE(ref.size() == out.tokens.size());
  for (std::size_t i = 0; i < ref.size(); ++i) {
    CHECK(ref[i].token == out.tokens[i].token);
    CHECK(ref[i].speaker == out.tokens[i].speaker);
  }
}

TEST_CASE("emission never precedes the audio a token depends on") {
  const PipelineConfig cfg = small_pipeline();
  const StreamingModel model = random_model(cfg, 4);
  const MatrixF x = testsupport::random_matrix(411, 20, 9);
  StreamTiming timing;
  timing.audio_duration = 4.125;
  timing.arrival_chunk = 0.32;
  const auto out = stream_recognize(x, MatrixF(), model, timing);
  std::size_t token = 0;
  for (const auto& s : out.steps) {
    for (std::size_t k = 0; k < s.released; ++k, ++token) {
      // A token sees the rest of its chunk and L*R chunks beyond it.
      const auto& c = model.encoder_config;
      const std::size_t last_seen = (token / c.chunk_size + 1 + c.layers * c.att_context.right_chunks) * c.chunk_size;
      const std::size_t need = std::min<std::size_t>(x.rows(), last_seen * 8);
      CHECK(s.wall_time + 1e-9 >= double(need - 1) * timing.frame_hop + timing.frame_length);
    }
  }
  CHECK(token == (411 + 7) / 8);
}

TEST_CASE("model archive round trip") {
  PipelineConfig cfg = small_pipeline();
  cfg.imu.mode = ImuMode::all;
  cfg.derive();
  cfg.encoder.input_dim = 20;
  const StreamingModel m = random_model(cfg, 5);
  REQUIRE(m.imu);
  const auto path = std::filesystem::temp_directory_path() / "glassasr_model_roundtrip.tensors";
  save_tensor_archive(model_archive(m), path);
  const StreamingModel back = load_model(cfg, path);
  CHECK(model_archive(back) == model_archive(m));
  std::filesystem::remove(path);
}

TEST_CASE("parallel_for visits every index and rethrows") {
  for (std::size_t workers : {1u, 3u}) {
    std::vector<std::atomic<int>> hits(50);
    parallel_for(50, workers, [&](std::size_t i) { ++hits[i]; });
    for (auto& h : hits) CHECK(h == 1);
    CHECK_THROWS_AS(parallel_for(20, workers,
                                 [](std::size_t i) {
                                   if (i == 7) throw std::runtime_error("boom");
                                 }),
                    std::runtime_error);
  }
  parallel_for(0, 4, [](std::size_t) { FAIL("called"); });
}
