#include "glassasr/segments.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "glassasr/error.hpp"

namespace glassasr {

std::string_view speaker_name(Speaker s) { return s == Speaker::self ? "SELF" : "OTHER"; }

std::optional<Speaker> parse_speaker(std::string_view name) {
  std::string upper(name);
  for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (upper == "SELF") return Speaker::self;
  if (upper == "OTHER") return Speaker::other;
  return std::nullopt;
}

std::vector<SpeechSegment> merge_segments(std::span<const SpeechSegment> segments, Speaker speaker) {
  std::vector<SpeechSegment> mine;
  for (const auto& s : segments) {
    if (s.speaker == speaker && s.end > s.start) mine.push_back(s);
  }
  std::sort(mine.begin(), mine.end(), [](const auto& a, const auto& b) { return a.start < b.start; });
  std::vector<SpeechSegment> out;
  for (const auto& s : mine) {
    if (!out.empty() && s.start <= out.back().end) {
      out.back().end = std::max(out.back().end, s.end);
    } else {
      out.push_back(s);
    }
  }
  return out;
}

namespace {

double total_length(const std::vector<SpeechSegment>& merged) {
  double sum = 0.0;
  for (const auto& s : merged) sum += s.end - s.start;
  return sum;
}

double intersection_length(const std::vector<SpeechSegment>& a, const std::vector<SpeechSegment>& b) {
  double sum = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const double lo = std::max(a[i].start, b[j].start);
    const double hi = std::min(a[i].end, b[j].end);
    if (hi > lo) sum += hi - lo;
    if (a[i].end < b[j].end) {
      ++i;
    } else {
      ++j;
    }
  }
  return sum;
}

}  // namespace

double compute_overlap_rate(std::span<const SpeechSegment> segments) {
  const auto self = merge_segments(segments, Speaker::self);
  const auto other = merge_segments(segments, Speaker::other);
  const double both = intersection_length(self, other);
  const double any = total_length(self) + total_length(other) - both;
  return any > 0.0 ? both / any : 0.0;
}

std::vector<SpeechSegment> segments_from_words(std::span<const WordRecord> words, double max_gap) {
  std::vector<SpeechSegment> out;
  for (Speaker spk : {Speaker::self, Speaker::other}) {
    std::vector<SpeechSegment> spans;
    for (const auto& w : words) {
      if (w.speaker == spk && w.end > w.start) spans.push_back({spk, w.start, w.end});
    }
    std::sort(spans.begin(), spans.end(), [](const auto& a, const auto& b) { return a.start < b.start; });
    std::vector<SpeechSegment> merged;
    for (const auto& s : spans) {
      if (!merged.empty() && s.start - merged.back().end <= max_gap) {
        merged.back().end = std::max(merged.back().end, s.end);
      } else {
        merged.push_back(s);
      }
    }
    out.insert(out.end(), merged.begin(), merged.end());
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.start < b.start; });
  return out;
}

SpeakerMapping default_speaker_mapping() { return {{"SELF", Speaker::self}, {"OTHER", Speaker::other}}; }

std::vector<SpeechSegment> read_rttm(const std::filesystem::path& path, const SpeakerMapping& mapping) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open RTTM file: " + path.string());
  std::vector<SpeechSegment> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    std::istringstream fields(line);
    std::vector<std::string> tok;
    for (std::string f; fields >> f;) tok.push_back(f);
    if (tok.empty() || tok[0].starts_with('#')) continue;
    if (tok[0] != "SPEAKER") continue;
    if (tok.size() < 8) throw DataError(where + ": SPEAKER row needs at least 8 fields");
    double onset = 0.0, dur = 0.0;
    try {
      std::size_t used = 0;
      onset = std::stod(tok[3], &used);
      if (used != tok[3].size()) throw std::invalid_argument("onset");
      dur = std::stod(tok[4], &used);
      if (used != tok[4].size()) throw std::invalid_argument("duration");
    } catch (const std::exception&) {
      throw DataError(where + ": non-numeric onset or duration");
    }
    if (onset < 0.0 || dur <= 0.0) throw DataError(where + ": onset must be >= 0 and duration > 0");
    auto it = mapping.find(tok[7]);
    if (it == mapping.end()) throw DataError(where + ": unknown speaker name '" + tok[7] + "'");
    out.push_back({it->second, onset, onset + dur});
  }
  return out;
}

void write_rttm(std::span<const SpeechSegment> segments, const std::filesystem::path& path, const std::string& file_id) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write RTTM file: " + path.string());
  char buf[256];
  for (const auto& s : segments) {
    std::snprintf(buf, sizeof buf, "SPEAKER %s 1 %.6f %.6f <NA> <NA> %s <NA> <NA>\n", file_id.c_str(), s.start,
                  s.end - s.start, std::string(speaker_name(s.speaker)).c_str());
    out << buf;
  }
  if (!out) throw DataError("write failed: " + path.string());
}

}  // namespace glassasr
