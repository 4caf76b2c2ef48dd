#include "glassasr/beamform.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>

#include "glassasr/dsp.hpp"
#include "glassasr/error.hpp"
#include "glassasr/kernels.hpp"

namespace glassasr {

void BeamformerBank::validate() const {
  if (directions == 0 || channels == 0 || taps == 0) throw std::invalid_argument("beamformer bank has an empty dimension");
  if (sample_rate <= 0) throw std::invalid_argument("beamformer bank sample rate must be positive");
  if (coefficients.size() != directions * channels * taps) throw std::invalid_argument("beamformer coefficient count mismatch");
  for (double c : coefficients) {
    if (!std::isfinite(c)) throw std::invalid_argument("beamformer coefficient not finite");
  }
}

BeamformerBank load_beamformer_bank(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open beamformer bank: " + path.string());
  BeamformerBank bank;
  std::string line;
  std::stringstream body;
  bool in_body = false;
  while (std::getline(in, line)) {
    if (!in_body) {
      std::istringstream ls(line);
      std::string key;
      if (!(ls >> key) || key.starts_with('#')) continue;
      long long value = 0;
      if (key == "directions" || key == "channels" || key == "taps" || key == "rate") {
        if (!(ls >> value) || value <= 0) throw DataError(path.string() + ": bad value for '" + key + "'");
        if (key == "directions") bank.directions = std::size_t(value);
        if (key == "channels") bank.channels = std::size_t(value);
        if (key == "taps") bank.taps = std::size_t(value);
        if (key == "rate") bank.sample_rate = int(value);
        continue;
      }
      in_body = true;
    }
    body << line << '\n';
  }
  const std::size_t expected = bank.directions * bank.channels * bank.taps;
  bank.coefficients.reserve(expected);
  for (std::string tok; body >> tok;) {
    try {
      std::size_t used = 0;
      bank.coefficients.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw DataError(path.string() + ": bad coefficient '" + tok + "'");
    }
  }
  try {
    bank.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(path.string() + ": " + e.what() + " (expected " + std::to_string(expected) + " coefficients, got " +
                    std::to_string(bank.coefficients.size()) + ")");
  }
  return bank;
}

void save_beamformer_bank(const BeamformerBank& bank, const std::filesystem::path& path) {
  bank.validate();
  std::ofstream out(path);
  if (!out) throw DataError("cannot write beamformer bank: " + path.string());
  out << "# glassasr beamformer bank\n"
      << "directions " << bank.directions << "\nchannels " << bank.channels << "\ntaps " << bank.taps << "\nrate "
      << bank.sample_rate << '\n';
  out << std::setprecision(17);
  for (std::size_t d = 0; d < bank.directions; ++d) {
    for (std::size_t c = 0; c < bank.channels; ++c) {
      const auto f = bank.filter(d, c);
      for (std::size_t m = 0; m < f.size(); ++m) out << (m ? " " : "") << f[m];
      out << '\n';
    }
  }
  if (!out) throw DataError("write failed: " + path.string());
}

std::vector<Vec3> default_glasses_geometry() {
  return {
      {0.070, 0.060, 0.010},   {0.070, -0.060, 0.010}, {0.060, 0.070, -0.020}, {0.060, -0.070, -0.020},
      {0.075, 0.000, -0.030},  {-0.050, 0.075, 0.000}, {-0.050, -0.075, 0.000},
  };
}

Vec3 mouth_direction() {
  const Vec3 v{0.04, 0.0, -0.09};
  const double n = std::sqrt(dot(v, v));
  return {v.x / n, v.y / n, v.z / n};
}

std::vector<Vec3> default_steering_directions(std::size_t horizontal) {
  std::vector<Vec3> out;
  for (std::size_t k = 0; k < horizontal; ++k) {
    const double az = 2.0 * M_PI * double(k) / double(horizontal);
    out.push_back({std::cos(az), std::sin(az), 0.0});
  }
  out.push_back(mouth_direction());
  return out;
}

std::vector<double> plane_wave_delays(std::span<const Vec3> mics, const Vec3& toward_source, int sample_rate,
                                      double speed_of_sound) {
  std::vector<double> out;
  out.reserve(mics.size());
  for (const auto& p : mics) out.push_back(-dot(p, toward_source) / speed_of_sound * sample_rate);
  return out;
}

BeamformerBank delay_and_sum_bank(std::span<const Vec3> mics, std::span<const Vec3> directions, std::size_t taps,
                                  int sample_rate, double speed_of_sound) {
  if (mics.empty() || directions.empty() || taps == 0) throw std::invalid_argument("delay_and_sum_bank: empty input");
  BeamformerBank bank{directions.size(), mics.size(), taps, sample_rate, {}};
  bank.coefficients.assign(directions.size() * mics.size() * taps, 0.0);
  const double bulk = (double(taps) - 1.0) / 2.0;
  const double beta = 6.0;
  const double i0_beta = std::cyl_bessel_i(0.0, beta);
  for (std::size_t d = 0; d < directions.size(); ++d) {
    const auto arrival = plane_wave_delays(mics, directions[d], sample_rate, speed_of_sound);
    for (std::size_t c = 0; c < mics.size(); ++c) {
      const double delay = bulk - arrival[c];
      if (delay < 0.0 || delay > double(taps - 1)) throw std::invalid_argument("delay_and_sum_bank: too few taps for array aperture");
      auto f = bank.filter(d, c);
      for (std::size_t n = 0; n < taps; ++n) {
        const double x = double(n) - delay;
        const double s = std::abs(x) < 1e-12 ? 1.0 : std::sin(M_PI * x) / (M_PI * x);
        // Window centred on the fractional delay, not the filter midpoint.
        const double r = x / (bulk + 1.0);
        const double w = std::abs(r) >= 1.0 ? 0.0 : std::cyl_bessel_i(0.0, beta * std::sqrt(1.0 - r * r)) / i0_beta;
        f[n] = s * w;
      }
    }
  }
  return bank;
}

std::vector<MultiChannelWave> apply_beamformer_bank(const MultiChannelWave& wave, const BeamformerBank& bank) {
  bank.validate();
  if (wave.channels() != bank.channels) {
    throw std::invalid_argument("beamformer expects " + std::to_string(bank.channels) + " channels, got " +
                                std::to_string(wave.channels()));
  }
  if (wave.sample_rate() != bank.sample_rate) {
    throw std::invalid_argument("beamformer rate " + std::to_string(bank.sample_rate) + " Hz does not match input " +
                                std::to_string(wave.sample_rate()) + " Hz");
  }
  std::vector<MultiChannelWave> beams;
  beams.reserve(bank.directions);
  for (std::size_t d = 0; d < bank.directions; ++d) {
    std::vector<double> acc(wave.frames(), 0.0);
    for (std::size_t c = 0; c < bank.channels; ++c) {
      const auto f = bank.filter(d, c);
      if (f.size() <= kDirectConvolutionMaxTaps) {
        kernels::fir_accumulate(wave.channel(c), f, acc);
      } else {
        const auto y = convolve_same(wave.channel(c), f);
        for (std::size_t t = 0; t < acc.size(); ++t) acc[t] += y[t];
      }
    }
    beams.push_back(MultiChannelWave::mono(std::move(acc), wave.sample_rate()));
  }
  return beams;
}

}  // namespace glassasr
