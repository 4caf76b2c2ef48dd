#pragma once

// Fixed FIR beamformer bank: K horizontal steering directions plus one
// toward the wearer's mouth. Coefficients are data (loaded from a file); a
// delay-and-sum generator provides a default bank and test fixtures.

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "glassasr/wave.hpp"

namespace glassasr {

struct BeamformerBank {
  std::size_t directions = 0;
  std::size_t channels = 0;
  std::size_t taps = 0;
  int sample_rate = 0;
  std::vector<double> coefficients;  // [direction][channel][tap], row-major

  std::span<const double> filter(std::size_t direction, std::size_t channel) const {
    return {coefficients.data() + (direction * channels + channel) * taps, taps};
  }
  std::span<double> filter(std::size_t direction, std::size_t channel) {
    return {coefficients.data() + (direction * channels + channel) * taps, taps};
  }

  // Throws std::invalid_argument if shapes or coefficients are inconsistent.
  void validate() const;
};

// Text format:
//   # comment lines
//   directions <D>
//   channels <C>
//   taps <N>
//   rate <Hz>
//   D*C rows of N whitespace-separated coefficients (direction-major)
BeamformerBank load_beamformer_bank(const std::filesystem::path& path);
void save_beamformer_bank(const BeamformerBank& bank, const std::filesystem::path& path);

struct Vec3 {
  double x = 0.0;  // forward
  double y = 0.0;  // left
  double z = 0.0;  // up
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

// Seven microphone positions (metres) laid out on a glasses frame.
std::vector<Vec3> default_glasses_geometry();

// Unit vector from the array centre toward the wearer's mouth.
Vec3 mouth_direction();

// K horizontal unit vectors at azimuths 2*pi*k/K followed by the mouth direction.
std::vector<Vec3> default_steering_directions(std::size_t horizontal = 12);

inline constexpr double kSpeedOfSound = 343.0;

// Plane-wave arrival delay (samples, relative to the array origin) at each mic
// for a source in direction `toward_source`.
std::vector<double> plane_wave_delays(std::span<const Vec3> mics, const Vec3& toward_source, int sample_rate,
                                      double speed_of_sound = kSpeedOfSound);

// Unnormalized delay-and-sum: every channel filter is a Kaiser-windowed sinc
// fractional delay, so a plane wave from a steering direction adds coherently
// with gain C. The bulk delay is (taps-1)/2 samples.
BeamformerBank delay_and_sum_bank(std::span<const Vec3> mics, std::span<const Vec3> directions, std::size_t taps,
                                  int sample_rate, double speed_of_sound = kSpeedOfSound);

// out[d] = sum_c filter[d][c] * wave[c], same length as the input.
// Throws std::invalid_argument on channel-count or sample-rate mismatch.
std::vector<MultiChannelWave> apply_beamformer_bank(const MultiChannelWave& wave, const BeamformerBank& bank);

}  // namespace glassasr
