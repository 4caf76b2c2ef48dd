#include "glassasr/pipeline.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "glassasr/error.hpp"
#include "glassasr/mel.hpp"
#include "glassasr/random.hpp"
#include "glassasr/tensor_archive.hpp"

namespace glassasr {

BeamformerBank make_beamformer_bank(const PipelineConfig& config) {
  if (config.beamformer.bank) return load_beamformer_bank(*config.beamformer.bank);
  const auto mics = default_glasses_geometry();
  const auto dirs = default_steering_directions(config.beamformer.horizontal_directions);
  return delay_and_sum_bank(mics, dirs, config.beamformer.taps, kProcessingRate);
}

MatrixF front_end(const MultiChannelWave& wave, const BeamformerBank& bank, const MelConfig& mel) {
  if (wave.channels() != bank.channels) {
    throw DataError("audio has " + std::to_string(wave.channels()) + " channels, beamformer expects " +
                    std::to_string(bank.channels));
  }
  const auto beams = apply_beamformer_bank(resample(wave, bank.sample_rate), bank);
  std::vector<LogMelFeatures> feats;
  feats.reserve(beams.size());
  for (const auto& b : beams) feats.push_back(log_mel(b, mel));
  return assemble_encoder_input(feats);
}

StreamingModel random_model(const PipelineConfig& config, std::uint64_t seed) {
  StreamingModel m;
  m.encoder_config = config.encoder;
  m.decoder_config = config.decoder;
  m.imu_config = config.imu.encoder;
  m.encoder = EncoderParams::random(config.encoder, derive_seed(seed, 1));
  m.decoder = DecoderParams::random(config.decoder, derive_seed(seed, 2));
  if (config.encoder.aux_dim > 0) m.imu = ImuEncoderParams::random(config.imu.encoder, derive_seed(seed, 3));
  m.vocab = Vocabulary::synthetic(config.decoder.vocab_size);
  return m;
}

StreamingModel load_model(const PipelineConfig& config, const std::filesystem::path& weights) {
  const TensorArchive ar = load_tensor_archive(weights);
  StreamingModel m;
  m.encoder_config = config.encoder;
  m.decoder_config = config.decoder;
  m.imu_config = config.imu.encoder;
  m.encoder = EncoderParams::from_archive(ar, config.encoder);
  m.decoder = DecoderParams::from_archive(ar, config.decoder);
  if (config.encoder.aux_dim > 0) m.imu = ImuEncoderParams::from_archive(ar, config.imu.encoder);
  m.vocab = Vocabulary::synthetic(config.decoder.vocab_size);
  return m;
}

TensorArchive model_archive(const StreamingModel& model) {
  TensorArchive ar;
  model.encoder.to_archive(ar);
  model.decoder.to_archive(ar);
  if (model.imu) model.imu->to_archive(ar);
  return ar;
}

MatrixF imu_features(const ImuStream& imu, const PipelineConfig& config, const StreamingModel& model) {
  if (config.imu.mode == ImuMode::off) return MatrixF();
  if (!model.imu) throw std::invalid_argument("model has no IMU encoder");
  ImuStream s = select_axes(imu, config.imu.mode);
  if (config.imu.filter) s = highpass_filter(s, config.imu.cutoff_hz);
  return encode_imu(s, model.imu_config, *model.imu);
}

StreamOutput stream_recognize(const MatrixF& features, const MatrixF& aux, const StreamingModel& model,
                              const StreamTiming& timing) {
  const auto& cfg = model.encoder_config;
  if (!(timing.arrival_chunk > 0.0)) throw std::invalid_argument("arrival chunk must be positive");
  if (features.rows() == 0) throw DataError("audio is shorter than one feature frame");
  EncoderCache cache(cfg);
  GreedyDecoder decoder(model.decoder_config, model.decoder, model.vocab);
  StreamOutput out;
  out.hidden = MatrixF(0, cfg.hidden);
  const std::size_t cf = cfg.chunk_frames();
  const std::size_t total_tokens = (features.rows() + cfg.downsample_factor - 1) / cfg.downsample_factor;
  std::size_t pos = 0, token = 0;
  while (pos < features.rows()) {
    const std::size_t end = std::min(features.rows(), pos + cf);
    const bool last = end == features.rows();
    // The step can run once the audio under its last frame has arrived.
    const double needed = double(end - 1) * timing.frame_hop + timing.frame_length;
    double wall = std::ceil(needed / timing.arrival_chunk - 1e-9) * timing.arrival_chunk;
    wall = std::min(wall, std::max(timing.audio_duration, needed));

    const MatrixF chunk = features.slice_rows(pos, end);
    std::vector<MatrixF> aux_chunk;
    if (cfg.aux_dim > 0) {
      const std::size_t tokens = (end - pos + cfg.downsample_factor - 1) / cfg.downsample_factor;
      const std::size_t lo = std::min(token, aux.rows());
      const std::size_t hi = last ? aux.rows() : std::min(aux.rows(), token + tokens);
      if (!last && hi - lo != tokens) throw DataError("IMU stream ends before the audio");
      aux_chunk.push_back(aux.slice_rows(lo, hi));
      token += tokens;
    } else if (!aux.empty()) {
      throw std::invalid_argument("aux features given to an encoder without aux input");
    }
    const auto released = encode_streaming_step(std::span<const MatrixF>(&chunk, 1), aux_chunk, cache, cfg,
                                                model.encoder, last);
    const MatrixF& h = released.front();
    const std::vector<double> times(h.rows(), wall);
    const auto tokens = decoder.push(h, times);
    out.tokens.insert(out.tokens.end(), tokens.begin(), tokens.end());
    out.hidden.append_rows(h);
    out.steps.push_back({end, h.rows(), wall});
    pos = end;
  }
  if (out.hidden.rows() != total_tokens) throw std::logic_error("stream released an unexpected token count");
  return out;
}

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i; !failed && (i = next++) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          failed = true;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace glassasr
