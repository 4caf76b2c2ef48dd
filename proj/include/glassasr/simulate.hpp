#pragma once

// Two-speaker, seven-channel conversation simulation: pairing, RIR
// convolution, controlled tail-head overlap, weighted-SNR noise, and speed
// perturbation.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "glassasr/manifest.hpp"
#include "glassasr/random.hpp"
#include "glassasr/types.hpp"
#include "glassasr/wave.hpp"

namespace glassasr {

inline constexpr std::size_t kArrayChannels = 7;

struct SnrChoice {
  double snr_db = 0.0;
  double weight = 1.0;
};

struct SimConfig {
  double overlap_lo = 0.05;
  double overlap_hi = 0.30;
  std::vector<SnrChoice> snr_choices{{0.0, 1.0}, {5.0, 2.0}, {10.0, 3.0}, {15.0, 2.0}, {20.0, 1.0}};
  int output_rate = kProcessingRate;
  double rttm_merge_gap = 0.3;  // seconds; word gaps up to this stay inside one RTTM segment

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct Pairing {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (SELF, OTHER) corpus indices
  std::optional<std::size_t> leftover;                     // unpaired index for odd corpus sizes
};

// Random perfect matching over corpus indices; every index is used at most
// once. Throws std::invalid_argument for corpus_size < 2.
Pairing pair_utterances(std::size_t corpus_size, std::uint64_t seed);

// Channel c = mono * rir[c], tail truncated to the input length.
MultiChannelWave convolve_rir(const MultiChannelWave& mono, const MultiChannelWave& rir);

struct OverlapMix {
  MultiChannelWave mixture;
  std::vector<WordRecord> reference;  // global times, sorted by start
  std::vector<SpeechSegment> rttm;
  std::size_t other_onset = 0;  // samples
  double measured_overlap = 0.0;
};

// Places OTHER so that it starts before SELF ends and the overlap rate
// measured on the emitted RTTM is as close as possible to overlap_ratio.
// Word times are seconds relative to each utterance's start.
OverlapMix mix_with_overlap(const MultiChannelWave& self_wave, const MultiChannelWave& other_wave,
                            std::span<const WordRecord> self_words, std::span<const WordRecord> other_words,
                            double overlap_ratio, double merge_gap = 0.3);

double sample_overlap_ratio(const SimConfig& config, Rng& rng);

// Draws snr_db with probability proportional to weight.
double draw_snr(std::span<const SnrChoice> choices, Rng& rng);

struct NoisyMix {
  MultiChannelWave noisy;
  MultiChannelWave scaled_noise;
  double gain = 0.0;
};

// Scales noise so that 10*log10(E_mixture / E_noise) == snr_db over the
// mixture span (energies summed over channels) and adds it. Mono noise is
// copied to every channel; shorter noise is looped from a random circular
// offset, longer noise is cropped at a random offset.
// Throws std::invalid_argument for a silent mixture or silent noise.
NoisyMix add_noise_at_snr(const MultiChannelWave& mixture, const MultiChannelWave& noise, double snr_db, Rng& rng);

// Closest num/den to factor with den <= max_den.
std::pair<long, long> rational_approximation(double factor, long max_den = 1000);

// Plays the wave `factor` times faster: duration scales by 1/factor and
// pitch shifts with it. Throws std::invalid_argument for factor <= 0.
MultiChannelWave speed_perturb(const MultiChannelWave& wave, double factor);
AlignedUtterance speed_perturb(const AlignedUtterance& utt, double factor);

// Corpus size after adding one perturbed copy of every utterance with a
// factor drawn uniformly from `factors`.
double perturbed_corpus_hours(double hours, std::span<const double> factors);

struct SimJob {
  AlignedUtterance self_utt;
  AlignedUtterance other_utt;
  double overlap_ratio = 0.0;
  MultiChannelWave rir_self;
  MultiChannelWave rir_other;
  std::optional<MultiChannelWave> noise;      // mono or 7 channels; absent means no noise
  std::optional<MultiChannelWave> rir_noise;  // applied to mono noise when present
  double snr_db = 10.0;
  std::uint64_t seed = 0;
  double rttm_merge_gap = 0.3;

  // Throws std::invalid_argument if the job is not runnable.
  void validate() const;
};

struct SimProvenance {
  std::uint64_t seed = 0;
  double requested_overlap = 0.0;
  double measured_overlap = 0.0;
  std::optional<double> snr_db;
  double other_onset = 0.0;  // seconds
  double duration = 0.0;
};

struct SimulatedConversation {
  MultiChannelWave mixture;
  std::vector<WordRecord> reference;
  std::vector<SpeechSegment> rttm;
  SimProvenance provenance;
};

// convolve_rir(SELF), convolve_rir(OTHER) -> mix_with_overlap ->
// add_noise_at_snr. A pure function of the job.
SimulatedConversation simulate_conversation(const SimJob& job);

// Deterministic stand-in for recorded speech: word-length harmonic bursts
// separated by pauses, with words named "w3" ... "w<vocab_size-1>".
AlignedUtterance synthetic_utterance(std::uint64_t seed, int sample_rate, double seconds,
                                     std::size_t vocab_size = 64);

// Seven-channel RIR: a direct-path impulse per mic followed by an
// exponentially decaying noise tail reaching -60 dB after rt60 seconds.
MultiChannelWave synthetic_rir(std::uint64_t seed, int sample_rate, double rt60 = 0.3);

// Number of conversations needed to reach target_hours.
std::size_t plan_job_count(double target_hours, double mean_conversation_seconds);

}  // namespace glassasr
