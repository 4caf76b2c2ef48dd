#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "doctest.h"
#include "glassasr/error.hpp"
#include "glassasr/random.hpp"
#include "glassasr/wave.hpp"
#include "support.hpp"

using namespace glassasr;
namespace fs = std::filesystem;

namespace {

std::vector<double> tone(double f, int rate, std::size_t n, double amp = 0.5) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = amp * std::sin(2.0 * std::numbers::pi * f * double(i) / rate);
  return x;
}

}  // namespace

TEST_CASE("wave round trip") {
  const auto path = fs::temp_directory_path() / "glassasr_wave_test.wav";
  Rng rng(3);
  std::vector<std::vector<double>> ch(3, std::vector<double>(1000));
  for (auto& c : ch) {
    for (auto& v : c) v = uniform(rng, -0.9, 0.9);
  }
  const auto w = MultiChannelWave::from_channels(ch, 16000);

  write_wave(w, path, WavEncoding::float32);
  const auto f = read_wave(path);
  REQUIRE(f.channels() == 3);
  REQUIRE(f.frames() == 1000);
  CHECK(f.sample_rate() == 16000);
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t t = 0; t < 1000; ++t) CHECK(f.channel(c)[t] == doctest::Approx(w.channel(c)[t]).epsilon(1e-7));
  }

  write_wave(w, path, WavEncoding::pcm16);
  const auto p = read_wave(path);
  for (std::size_t t = 0; t < 1000; ++t) CHECK(std::abs(p.channel(1)[t] - w.channel(1)[t]) <= 0.5 / 32768.0 + 1e-12);
  fs::remove(path);
}

TEST_CASE("reading bad files fails with a data error") {
  CHECK_THROWS_AS(read_wave("/nonexistent/file.wav"), DataError);
  const auto path = fs::temp_directory_path() / "glassasr_bad.wav";
  {
    std::ofstream out(path, std::ios::binary);
    out << "RIFF0000WAVEjunk";
  }
  CHECK_THROWS_AS(read_wave(path), DataError);
  fs::remove(path);
}

TEST_CASE("resampling a tone preserves amplitude and length law") {
  const auto x = tone(1000.0, 48000, 48000);
  const auto y = resample_ratio(x, 1, 3);
  CHECK(y.size() == 16000);
  CHECK(testsupport::tone_amplitude(y, 1000.0, 16000, 2000, 14000) == doctest::Approx(0.5).epsilon(1e-3));
  const auto up = resample_ratio(x, 2, 1);
  CHECK(up.size() == 96000);
  CHECK(resample_ratio(x, 3, 3) == x);
}

TEST_CASE("resampling removes content above the new Nyquist") {
  const auto x = tone(10000.0, 48000, 48000);
  const auto y = resample_ratio(x, 1, 3);
  double e = 0.0;
  for (std::size_t i = 2000; i < 14000; ++i) e += y[i] * y[i];
  CHECK(std::sqrt(e / 12000.0) < 1e-3);
}

TEST_CASE("resample a multichannel wave") {
  const auto w = MultiChannelWave::from_channels({tone(440.0, 44100, 4410), tone(880.0, 44100, 4410)}, 44100);
  const auto r = resample(w, 16000);
  CHECK(r.sample_rate() == 16000);
  CHECK(r.channels() == 2);
  CHECK(r.frames() == 1600);
  CHECK(resample(w, 44100) == w);
  CHECK_THROWS_AS(resample(w, 0), std::invalid_argument);
}
