#include "glassasr/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "glassasr/dsp.hpp"
#include "glassasr/segments.hpp"

namespace glassasr {

void SimConfig::validate() const {
  if (!(overlap_lo >= 0.0) || !(overlap_hi >= overlap_lo) || !(overlap_hi < 1.0)) {
    throw std::invalid_argument("overlap_range must satisfy 0 <= lo <= hi < 1");
  }
  if (snr_choices.empty()) throw std::invalid_argument("snr_choices must not be empty");
  for (const auto& c : snr_choices) {
    if (!std::isfinite(c.snr_db)) throw std::invalid_argument("snr_choices: snr must be finite");
    if (!(c.weight > 0.0) || !std::isfinite(c.weight)) throw std::invalid_argument("snr_choices: weights must be positive and finite");
  }
  if (output_rate <= 0) throw std::invalid_argument("output_rate must be positive");
  if (!(rttm_merge_gap >= 0.0)) throw std::invalid_argument("rttm_merge_gap must be non-negative");
}

Pairing pair_utterances(std::size_t corpus_size, std::uint64_t seed) {
  if (corpus_size < 2) throw std::invalid_argument("pair_utterances: need at least 2 utterances");
  std::vector<std::size_t> order(corpus_size);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  shuffle<std::size_t>(order, rng);
  Pairing out;
  for (std::size_t i = 0; i + 1 < corpus_size; i += 2) out.pairs.emplace_back(order[i], order[i + 1]);
  if (corpus_size % 2) out.leftover = order.back();
  return out;
}

MultiChannelWave convolve_rir(const MultiChannelWave& mono, const MultiChannelWave& rir) {
  if (mono.channels() != 1) throw std::invalid_argument("convolve_rir: input must be mono");
  if (mono.sample_rate() != rir.sample_rate()) {
    throw std::invalid_argument("convolve_rir: rate mismatch (" + std::to_string(mono.sample_rate()) + " vs " +
                                std::to_string(rir.sample_rate()) + " Hz)");
  }
  MultiChannelWave out(rir.channels(), mono.frames(), mono.sample_rate());
  for (std::size_t c = 0; c < rir.channels(); ++c) {
    const auto y = convolve_same(mono.channel(0), rir.channel(c));
    std::copy(y.begin(), y.end(), out.channel(c).begin());
  }
  return out;
}

namespace {

std::vector<WordRecord> tag_words(std::span<const WordRecord> words, Speaker speaker, double offset) {
  std::vector<WordRecord> out(words.begin(), words.end());
  for (auto& w : out) {
    w.speaker = speaker;
    w.start += offset;
    w.end += offset;
  }
  return out;
}

}  // namespace

OverlapMix mix_with_overlap(const MultiChannelWave& self_wave, const MultiChannelWave& other_wave,
                            std::span<const WordRecord> self_words, std::span<const WordRecord> other_words,
                            double overlap_ratio, double merge_gap) {
  if (!(overlap_ratio >= 0.0 && overlap_ratio < 1.0)) throw std::invalid_argument("overlap_ratio must be in [0, 1)");
  if (self_wave.channels() != other_wave.channels()) throw std::invalid_argument("mix_with_overlap: channel mismatch");
  if (self_wave.sample_rate() != other_wave.sample_rate()) throw std::invalid_argument("mix_with_overlap: rate mismatch");
  const int rate = self_wave.sample_rate();
  const std::size_t self_n = self_wave.frames();
  const std::size_t other_n = other_wave.frames();

  const auto self_ref = tag_words(self_words, Speaker::self, 0.0);
  auto measure = [&](std::size_t onset) {
    auto words = self_ref;
    const auto other = tag_words(other_words, Speaker::other, double(onset) / rate);
    words.insert(words.end(), other.begin(), other.end());
    return compute_overlap_rate(segments_from_words(words, merge_gap));
  };

  std::size_t onset = self_n;
  if (overlap_ratio > 0.0) {
    const std::size_t earliest = self_n - std::min(self_n, other_n);
    if (self_words.empty() || other_words.empty()) {
      // No alignment to measure against: realize the ratio on the waveform spans.
      const double ov = overlap_ratio * double(self_n + other_n) / (1.0 + overlap_ratio);
      onset = self_n - std::min<std::size_t>(std::size_t(std::lround(ov)), self_n - earliest);
    } else {
      // Coarse scan from the abutting position backwards, then refine to one
      // sample. Ties keep the later onset.
      const std::size_t step = std::max<std::size_t>(1, std::size_t(rate / 100));
      double best_err = std::abs(measure(onset) - overlap_ratio);
      for (std::size_t back = step; back <= self_n - earliest; back += step) {
        const double err = std::abs(measure(self_n - back) - overlap_ratio);
        if (err < best_err) {
          best_err = err;
          onset = self_n - back;
        }
      }
      const std::size_t lo = std::max(earliest, onset >= step ? onset - step : 0);
      const std::size_t hi = std::min(self_n, onset + step);
      for (std::size_t cand = hi + 1; cand-- > lo;) {
        const double err = std::abs(measure(cand) - overlap_ratio);
        if (err < best_err) {
          best_err = err;
          onset = cand;
        }
      }
    }
  }

  OverlapMix out;
  out.other_onset = onset;
  out.mixture = MultiChannelWave(self_wave.channels(), std::max(self_n, onset + other_n), rate);
  for (std::size_t c = 0; c < self_wave.channels(); ++c) {
    auto dst = out.mixture.channel(c);
    const auto s = self_wave.channel(c);
    const auto o = other_wave.channel(c);
    std::copy(s.begin(), s.end(), dst.begin());
    for (std::size_t t = 0; t < other_n; ++t) dst[onset + t] += o[t];
  }
  out.reference = self_ref;
  const auto other = tag_words(other_words, Speaker::other, double(onset) / rate);
  out.reference.insert(out.reference.end(), other.begin(), other.end());
  std::stable_sort(out.reference.begin(), out.reference.end(),
                   [](const WordRecord& a, const WordRecord& b) { return a.start < b.start; });
  out.rttm = segments_from_words(out.reference, merge_gap);
  out.measured_overlap = compute_overlap_rate(out.rttm);
  return out;
}

double sample_overlap_ratio(const SimConfig& config, Rng& rng) {
  return uniform(rng, config.overlap_lo, config.overlap_hi);
}

double draw_snr(std::span<const SnrChoice> choices, Rng& rng) {
  if (choices.empty()) throw std::invalid_argument("draw_snr: no choices");
  double total = 0.0;
  for (const auto& c : choices) {
    if (!(c.weight > 0.0)) throw std::invalid_argument("draw_snr: weights must be positive");
    total += c.weight;
  }
  double u = uniform01(rng) * total;
  for (const auto& c : choices) {
    if (u < c.weight) return c.snr_db;
    u -= c.weight;
  }
  return choices.back().snr_db;
}

NoisyMix add_noise_at_snr(const MultiChannelWave& mixture, const MultiChannelWave& noise, double snr_db, Rng& rng) {
  if (!std::isfinite(snr_db)) throw std::invalid_argument("add_noise_at_snr: snr must be finite");
  if (noise.channels() != 1 && noise.channels() != mixture.channels()) {
    throw std::invalid_argument("add_noise_at_snr: noise must be mono or match the mixture channel count");
  }
  if (noise.frames() == 0) throw std::invalid_argument("add_noise_at_snr: empty noise");
  if (noise.sample_rate() != mixture.sample_rate()) throw std::invalid_argument("add_noise_at_snr: rate mismatch");
  const double signal_energy = mixture.energy();
  if (!(signal_energy > 0.0)) throw std::invalid_argument("add_noise_at_snr: silent mixture, SNR undefined");

  const std::size_t n = mixture.frames();
  const std::size_t src = noise.frames();
  const std::size_t offset = src > n ? uniform_index(rng, src - n + 1) : uniform_index(rng, src);
  MultiChannelWave aligned(mixture.channels(), n, mixture.sample_rate());
  for (std::size_t c = 0; c < mixture.channels(); ++c) {
    const auto in = noise.channel(noise.channels() == 1 ? 0 : c);
    auto out = aligned.channel(c);
    for (std::size_t t = 0; t < n; ++t) out[t] = in[(offset + t) % src];
  }
  const double noise_energy = aligned.energy();
  if (!(noise_energy > 0.0)) throw std::invalid_argument("add_noise_at_snr: silent noise");

  NoisyMix out;
  out.gain = std::sqrt(signal_energy / (noise_energy * std::pow(10.0, snr_db / 10.0)));
  out.scaled_noise = std::move(aligned);
  out.noisy = mixture;
  for (std::size_t c = 0; c < mixture.channels(); ++c) {
    auto nz = out.scaled_noise.channel(c);
    auto dst = out.noisy.channel(c);
    for (std::size_t t = 0; t < n; ++t) {
      nz[t] *= out.gain;
      dst[t] += nz[t];
    }
  }
  return out;
}

std::pair<long, long> rational_approximation(double factor, long max_den) {
  if (!(factor > 0.0) || !std::isfinite(factor)) throw std::invalid_argument("factor must be positive");
  long best_num = 1, best_den = 1;
  double best_err = std::abs(factor - 1.0);
  for (long den = 1; den <= max_den; ++den) {
    const long num = std::max(1L, std::lround(factor * double(den)));
    const double err = std::abs(factor - double(num) / double(den));
    if (err < best_err - 1e-15) {
      best_err = err;
      best_num = num;
      best_den = den;
    }
    if (best_err == 0.0) break;
  }
  const long g = std::gcd(best_num, best_den);
  return {best_num / g, best_den / g};
}

MultiChannelWave speed_perturb(const MultiChannelWave& wave, double factor) {
  if (!(factor > 0.0)) throw std::invalid_argument("speed_perturb: factor must be positive");
  const auto [num, den] = rational_approximation(factor);
  if (num == den) return wave;
  std::vector<std::vector<double>> out(wave.channels());
  for (std::size_t c = 0; c < wave.channels(); ++c) out[c] = resample_ratio(wave.channel(c), den, num);
  return MultiChannelWave::from_channels(out, wave.sample_rate());
}

AlignedUtterance speed_perturb(const AlignedUtterance& utt, double factor) {
  AlignedUtterance out{speed_perturb(utt.wave, factor), utt.words, utt.transcript};
  const auto [num, den] = rational_approximation(factor);
  const double scale = double(den) / double(num);
  const double dur = out.wave.duration();
  for (auto& w : out.words) {
    w.start = std::min(w.start * scale, dur);
    w.end = std::min(w.end * scale, dur);
  }
  return out;
}

double perturbed_corpus_hours(double hours, std::span<const double> factors) {
  if (factors.empty()) return hours;
  double mean_inverse = 0.0;
  for (double f : factors) {
    if (!(f > 0.0)) throw std::invalid_argument("speed factors must be positive");
    mean_inverse += 1.0 / f;
  }
  return hours * (1.0 + mean_inverse / double(factors.size()));
}

void SimJob::validate() const {
  if (!(overlap_ratio >= 0.0 && overlap_ratio < 1.0)) throw std::invalid_argument("SimJob: overlap_ratio must be in [0, 1)");
  if (!std::isfinite(snr_db)) throw std::invalid_argument("SimJob: snr_db must be finite");
  if (rir_self.channels() != kArrayChannels || rir_other.channels() != kArrayChannels) {
    throw std::invalid_argument("SimJob: RIRs must have 7 channels");
  }
  if (rir_noise && rir_noise->channels() != kArrayChannels) throw std::invalid_argument("SimJob: noise RIR must have 7 channels");
  if (noise && noise->channels() != 1 && noise->channels() != kArrayChannels) {
    throw std::invalid_argument("SimJob: noise must be mono or 7 channels");
  }
  glassasr::validate(self_utt);
  glassasr::validate(other_utt);
}

SimulatedConversation simulate_conversation(const SimJob& job) {
  job.validate();
  const auto self7 = convolve_rir(job.self_utt.wave, job.rir_self);
  const auto other7 = convolve_rir(job.other_utt.wave, job.rir_other);
  auto mix = mix_with_overlap(self7, other7, job.self_utt.words, job.other_utt.words, job.overlap_ratio,
                              job.rttm_merge_gap);

  SimulatedConversation out;
  out.provenance.seed = job.seed;
  out.provenance.requested_overlap = job.overlap_ratio;
  out.provenance.measured_overlap = mix.measured_overlap;
  out.provenance.other_onset = double(mix.other_onset) / mix.mixture.sample_rate();
  out.provenance.duration = mix.mixture.duration();
  out.reference = std::move(mix.reference);
  out.rttm = std::move(mix.rttm);

  if (job.noise) {
    Rng rng(job.seed);
    MultiChannelWave noise7 = *job.noise;
    if (noise7.channels() == 1 && job.rir_noise) noise7 = convolve_rir(noise7, *job.rir_noise);
    out.mixture = add_noise_at_snr(mix.mixture, noise7, job.snr_db, rng).noisy;
    out.provenance.snr_db = job.snr_db;
  } else {
    out.mixture = std::move(mix.mixture);
  }
  return out;
}

std::size_t plan_job_count(double target_hours, double mean_conversation_seconds) {
  if (!(target_hours >= 0.0)) throw std::invalid_argument("plan_job_count: hours must be non-negative");
  if (!(mean_conversation_seconds > 0.0)) throw std::invalid_argument("plan_job_count: mean duration must be positive");
  return static_cast<std::size_t>(std::ceil(target_hours * 3600.0 / mean_conversation_seconds - 1e-9));
}

}  // namespace glassasr

namespace glassasr {

AlignedUtterance synthetic_utterance(std::uint64_t seed, int sample_rate, double seconds, std::size_t vocab_size) {
  if (sample_rate <= 0 || !(seconds > 0.5)) throw std::invalid_argument("synthetic_utterance: need rate > 0 and > 0.5 s");
  if (vocab_size < 4) throw std::invalid_argument("synthetic_utterance: vocab_size must be >= 4");
  Rng rng(seed);
  const std::size_t n = std::size_t(std::lround(seconds * sample_rate));
  std::vector<double> x(n, 0.0);
  AlignedUtterance utt;
  double t = uniform(rng, 0.05, 0.2);
  while (true) {
    const double len = uniform(rng, 0.2, 0.5);
    if (t + len > seconds - 0.05) break;
    const std::size_t id = 3 + uniform_index(rng, vocab_size - 3);
    const double f0 = 100.0 + 10.0 * double(id % 16);
    const std::size_t a = std::size_t(t * sample_rate), b = std::size_t((t + len) * sample_rate);
    for (std::size_t i = a; i < b; ++i) {
      const double u = double(i - a) / double(b - a);
      const double env = std::sin(M_PI * u);
      double v = 0.0;
      for (int h = 1; h <= 4; ++h) v += std::sin(2.0 * M_PI * f0 * h * double(i) / sample_rate) / h;
      x[i] = 0.2 * env * v;
    }
    utt.words.push_back({"w" + std::to_string(id), Speaker::self, t, t + len});
    t += len + uniform(rng, 0.05, 0.35);
  }
  for (const auto& w : utt.words) utt.transcript += (utt.transcript.empty() ? "" : " ") + w.text;
  utt.wave = MultiChannelWave::mono(std::move(x), sample_rate);
  return utt;
}

MultiChannelWave synthetic_rir(std::uint64_t seed, int sample_rate, double rt60) {
  if (sample_rate <= 0 || !(rt60 > 0.0)) throw std::invalid_argument("synthetic_rir: need positive rate and rt60");
  Rng rng(seed);
  const std::size_t len = std::size_t(rt60 * sample_rate);
  const double decay = std::log(1000.0) / (rt60 * sample_rate);
  MultiChannelWave rir(kArrayChannels, len, sample_rate);
  const std::size_t base = std::size_t(0.002 * sample_rate);
  for (std::size_t c = 0; c < kArrayChannels; ++c) {
    auto h = rir.channel(c);
    const std::size_t direct = base + uniform_index(rng, std::max<std::size_t>(1, sample_rate / 4000));
    if (direct < len) h[direct] = 1.0;
    for (std::size_t i = direct + 1; i < len; ++i) h[i] = 0.1 * normal01(rng) * std::exp(-decay * double(i - direct));
  }
  return rir;
}

}  // namespace glassasr
