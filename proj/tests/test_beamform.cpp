#include <cmath>
#include <filesystem>
#include <numbers>

#include "doctest.h"
#include "glassasr/beamform.hpp"
#include "glassasr/error.hpp"
#include "glassasr/random.hpp"
#include "support.hpp"

using namespace glassasr;

namespace {

MultiChannelWave noise_wave(std::size_t channels, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  MultiChannelWave w(channels, n, 16000);
  for (std::size_t c = 0; c < channels; ++c) {
    for (auto& v : w.channel(c)) v = normal01(rng);
  }
  return w;
}

// Plane-wave tone arriving from `source`, exact per-mic fractional delays.
MultiChannelWave plane_wave_tone(std::span<const Vec3> mics, const Vec3& source, double freq, std::size_t n) {
  const auto delays = plane_wave_delays(mics, source, 16000);
  MultiChannelWave w(mics.size(), n, 16000);
  for (std::size_t c = 0; c < mics.size(); ++c) {
    for (std::size_t t = 0; t < n; ++t) {
      w.channel(c)[t] = std::sin(2.0 * std::numbers::pi * freq * (double(t) - delays[c]) / 16000.0);
    }
  }
  return w;
}

}  // namespace

TEST_CASE("default bank shape") {
  const auto mics = default_glasses_geometry();
  CHECK(mics.size() == 7);
  const auto dirs = default_steering_directions(12);
  CHECK(dirs.size() == 13);
  const auto bank = delay_and_sum_bank(mics, dirs, 65, 16000);
  const auto beams = apply_beamformer_bank(noise_wave(7, 1600, 1), bank);
  CHECK(beams.size() == 13);
  for (const auto& b : beams) {
    CHECK(b.channels() == 1);
    CHECK(b.frames() == 1600);
  }
}

TEST_CASE("identity, linearity and shift covariance") {
  BeamformerBank bank{1, 3, 8, 16000, std::vector<double>(24, 0.0)};
  bank.filter(0, 1)[0] = 1.0;
  const auto x = noise_wave(3, 500, 2);
  const auto y = apply_beamformer_bank(x, bank);
  for (std::size_t t = 0; t < 500; ++t) CHECK(y[0].channel(0)[t] == x.channel(1)[t]);

  Rng rng(5);
  for (auto& v : bank.coefficients) v = normal01(rng);
  const auto a = noise_wave(3, 500, 3), b = noise_wave(3, 500, 4);
  MultiChannelWave sum(3, 500, 16000), shifted(3, 500, 16000);
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t t = 0; t < 500; ++t) {
      sum.channel(c)[t] = 2.0 * a.channel(c)[t] - b.channel(c)[t];
      shifted.channel(c)[t] = t >= 11 ? a.channel(c)[t - 11] : 0.0;
    }
  }
  const auto ya = apply_beamformer_bank(a, bank)[0], yb = apply_beamformer_bank(b, bank)[0];
  const auto ys = apply_beamformer_bank(sum, bank)[0], yshift = apply_beamformer_bank(shifted, bank)[0];
  for (std::size_t t = 0; t < 500; ++t) {
    CHECK(ys.channel(0)[t] == doctest::Approx(2.0 * ya.channel(0)[t] - yb.channel(0)[t]).scale(1.0).epsilon(1e-12));
    CHECK(yshift.channel(0)[t] == doctest::Approx(t >= 11 ? ya.channel(0)[t - 11] : 0.0).scale(1.0).epsilon(1e-12));
  }
}

TEST_CASE("delay-and-sum response matches the array response") {
  const auto mics = default_glasses_geometry();
  const auto dirs = default_steering_directions(12);
  const auto bank = delay_and_sum_bank(mics, dirs, 65, 16000);
  for (double f : {500.0, 1000.0, 2500.0}) {
    for (std::size_t src : {0u, 3u, 12u}) {
      const auto beams = apply_beamformer_bank(plane_wave_tone(mics, dirs[src], f, 8000), bank);
      for (std::size_t d = 0; d < dirs.size(); ++d) {
        const double oracle = testsupport::das_array_response(mics, dirs[d], dirs[src], f);
        if (oracle < 0.5 * double(mics.size())) continue;
        const double gain = testsupport::tone_amplitude(beams[d].channel(0), f, 16000, 1000, 8000);
        INFO("f=" << f << " src=" << src << " beam=" << d);
        CHECK(std::abs(20.0 * std::log10(gain / oracle)) <= 0.1);
      }
    }
  }
}

TEST_CASE("bank file round trip and shape checks") {
  const auto mics = default_glasses_geometry();
  const auto dirs = default_steering_directions(4);
  const auto bank = delay_and_sum_bank(mics, dirs, 33, 16000);
  const auto path = std::filesystem::temp_directory_path() / "glassasr_bank.txt";
  save_beamformer_bank(bank, path);
  const auto back = load_beamformer_bank(path);
  CHECK(back.directions == 5);
  CHECK(back.channels == 7);
  CHECK(back.taps == 33);
  for (std::size_t i = 0; i < bank.coefficients.size(); ++i) CHECK(back.coefficients[i] == doctest::Approx(bank.coefficients[i]));
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_beamformer_bank(path), DataError);
  CHECK_THROWS_AS(apply_beamformer_bank(noise_wave(6, 100, 1), bank), std::invalid_argument);
}
