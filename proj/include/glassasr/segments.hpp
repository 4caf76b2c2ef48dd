#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "glassasr/types.hpp"

namespace glassasr {

// Sorted, non-overlapping union of one speaker's segments.
std::vector<SpeechSegment> merge_segments(std::span<const SpeechSegment> segments, Speaker speaker);

// Fraction of speech time with both speakers active:
//   |SELF ∩ OTHER| / |SELF ∪ OTHER|,  0 when there is no speech.
double compute_overlap_rate(std::span<const SpeechSegment> segments);

// Merges word spans per speaker into segments, joining gaps <= max_gap seconds.
std::vector<SpeechSegment> segments_from_words(std::span<const WordRecord> words, double max_gap);

using SpeakerMapping = std::map<std::string, Speaker>;

// Identity mapping for the names "SELF" and "OTHER".
SpeakerMapping default_speaker_mapping();

// Reads SPEAKER rows; other row types are skipped. Throws DataError on a
// malformed row or a speaker name absent from `mapping`.
std::vector<SpeechSegment> read_rttm(const std::filesystem::path& path,
                                     const SpeakerMapping& mapping = default_speaker_mapping());

// Writes one SPEAKER row per segment with microsecond resolution.
void write_rttm(std::span<const SpeechSegment> segments, const std::filesystem::path& path,
                const std::string& file_id);

}  // namespace glassasr
