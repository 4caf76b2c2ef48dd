#pragma once

// Multi-speaker WER with speaker-attribution errors, and mean per-word
// emission latency over correctly recognized words.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "glassasr/types.hpp"

namespace glassasr {

// Lowercase ASCII and drop punctuation other than apostrophes.
std::string normalize_text(std::string_view text);

enum class EditOp { match, substitution, attribution, deletion, insertion };
std::string_view edit_op_name(EditOp op);

struct AlignedPair {
  EditOp op = EditOp::match;
  std::optional<std::size_t> ref;  // index into the reference, absent for insertions
  std::optional<std::size_t> hyp;  // index into the hypothesis, absent for deletions
};

struct AlignmentOptions {
  double attribution_cost = 1.0;  // same text, different speaker
  bool normalize = true;          // compare normalize_text() forms
};

struct Alignment {
  std::vector<AlignedPair> pairs;  // in sequence order
  double cost = 0.0;
};

// Minimum-cost edit alignment over (word, speaker) pairs. Substitution,
// insertion and deletion cost 1. Among equal-cost alignments the backtrace
// prefers a diagonal step (match, substitution or attribution), then a
// deletion, then an insertion.
Alignment align_multispeaker(std::span<const WordRecord> ref, std::span<const EmittedToken> hyp,
                             const AlignmentOptions& options = {});

struct SpeakerCounts {
  std::size_t ref_words = 0;
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t attribution_errors = 0;

  std::size_t errors() const { return substitutions + deletions + insertions + attribution_errors; }
  // 100 * errors / ref_words; throws DataError when ref_words == 0.
  double wer() const;
  SpeakerCounts& operator+=(const SpeakerCounts& o);
};

struct RecordingScore {
  std::string recording;
  SpeakerCounts self;
  SpeakerCounts other;
  double latency_sum = 0.0;
  std::size_t latency_words = 0;
};

// Errors are charged to the reference word's speaker; insertions to the
// hypothesis token's speaker.
RecordingScore score_recording(std::string recording, std::span<const WordRecord> ref,
                               std::span<const EmittedToken> hyp, const Alignment& alignment);

struct LatencyStats {
  double sum = 0.0;
  std::size_t count = 0;
  std::optional<double> mean() const {
    return count ? std::optional<double>(sum / double(count)) : std::nullopt;
  }
};

// emission_time - ref end, over pairs correct in both text and speaker.
LatencyStats compute_latency(const Alignment& alignment, std::span<const WordRecord> ref,
                             std::span<const EmittedToken> hyp);

inline double overall_wer(double self_wer, double other_wer) { return (self_wer + other_wer) / 2.0; }

struct EvalReport {
  SpeakerCounts self;
  SpeakerCounts other;
  double self_wer = 0.0;
  double other_wer = 0.0;
  double overall_wer = 0.0;
  std::optional<double> mean_latency;  // seconds
  std::size_t latency_word_count = 0;
  std::vector<RecordingScore> recordings;
};

// Pools counts over recordings. Throws DataError if either speaker has no
// reference words.
EvalReport compute_wer_report(std::span<const RecordingScore> recordings);

// Scores every reference recording against its hypothesis tokens (missing
// hypotheses score as all deletions). Throws DataError for hypotheses
// naming an unknown recording.
EvalReport evaluate_corpus(const std::map<std::string, std::vector<WordRecord>>& refs,
                           const std::map<std::string, std::vector<EmittedToken>>& hyps,
                           const AlignmentOptions& options = {});

}  // namespace glassasr
