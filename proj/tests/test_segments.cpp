#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "glassasr/error.hpp"
#include "glassasr/random.hpp"
#include "glassasr/segments.hpp"

using namespace glassasr;
namespace fs = std::filesystem;

namespace {

// Overlap rate on a 1 ms grid.
double grid_overlap(const std::vector<SpeechSegment>& segs) {
  double end = 0.0;
  for (const auto& s : segs) end = std::max(end, s.end);
  std::size_t both = 0, any = 0;
  for (std::size_t i = 0; i * 0.001 < end; ++i) {
    const double t = (double(i) + 0.5) * 0.001;
    bool self = false, other = false;
    for (const auto& s : segs) {
      if (t >= s.start && t < s.end) (s.speaker == Speaker::self ? self : other) = true;
    }
    both += self && other;
    any += self || other;
  }
  return any ? double(both) / double(any) : 0.0;
}

}  // namespace

TEST_CASE("overlap rate matches a sampled grid") {
  Rng rng(1);
  for (int n = 0; n < 50; ++n) {
    std::vector<SpeechSegment> segs;
    for (int k = 0; k < 6; ++k) {
      const double s = double(uniform_index(rng, 3000)) / 1000.0;
      const double len = double(1 + uniform_index(rng, 1000)) / 1000.0;
      segs.push_back({uniform_index(rng, 2) ? Speaker::self : Speaker::other, s, s + len});
    }
    CHECK(compute_overlap_rate(segs) == doctest::Approx(grid_overlap(segs)).epsilon(1e-9).scale(1.0));
  }
  CHECK(compute_overlap_rate({}) == 0.0);
}

TEST_CASE("segments from words merge short gaps") {
  const std::vector<WordRecord> words{{"a", Speaker::self, 0.0, 0.5},
                                      {"b", Speaker::self, 0.7, 1.0},
                                      {"c", Speaker::self, 2.0, 2.5},
                                      {"d", Speaker::other, 0.9, 1.4}};
  const auto segs = segments_from_words(words, 0.3);
  std::size_t self_segs = 0;
  for (const auto& s : segs) self_segs += s.speaker == Speaker::self;
  CHECK(self_segs == 2);
  CHECK(merge_segments(segs, Speaker::self).front().end == 1.0);
}

TEST_CASE("RTTM round trip and errors") {
  const auto path = fs::temp_directory_path() / "glassasr_test.rttm";
  const std::vector<SpeechSegment> segs{{Speaker::self, 0.25, 1.5}, {Speaker::other, 1.25, 3.0}};
  write_rttm(segs, path, "conv1");
  const auto back = read_rttm(path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].start == doctest::Approx(0.25));
  CHECK(back[1].speaker == Speaker::other);
  CHECK(back[1].end == doctest::Approx(3.0));
  {
    std::ofstream out(path);
    out << "SPEAKER conv1 1 0.0 1.0 <NA> <NA> CARLA <NA> <NA>\n";
  }
  CHECK_THROWS_AS(read_rttm(path), DataError);
  SpeakerMapping m{{"CARLA", Speaker::other}};
  CHECK(read_rttm(path, m).front().speaker == Speaker::other);
  fs::remove(path);
}
