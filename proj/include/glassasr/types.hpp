#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace glassasr {

// SELF is the glasses wearer, OTHER the conversation partner.
enum class Speaker { self, other };

std::string_view speaker_name(Speaker s);
// Accepts "SELF"/"OTHER" in any case.
std::optional<Speaker> parse_speaker(std::string_view name);

struct SpeechSegment {
  Speaker speaker = Speaker::self;
  double start = 0.0;  // seconds
  double end = 0.0;

  double duration() const { return end - start; }
  bool operator==(const SpeechSegment&) const = default;
};

struct WordRecord {
  std::string text;
  Speaker speaker = Speaker::self;
  double start = 0.0;
  double end = 0.0;

  bool operator==(const WordRecord&) const = default;
};

// A hypothesis token together with the stream time at which it was emitted.
struct EmittedToken {
  std::string token;
  Speaker speaker = Speaker::self;
  double emission_time = 0.0;  // seconds

  bool operator==(const EmittedToken&) const = default;
};

}  // namespace glassasr
