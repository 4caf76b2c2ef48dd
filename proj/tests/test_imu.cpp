#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "doctest.h"
#include "glassasr/error.hpp"
#include "glassasr/imu.hpp"
#include "glassasr/random.hpp"
#include "support.hpp"

using namespace glassasr;

namespace {

ImuStream sine_stream(double freq, double seconds, double rate = 1000.0, std::size_t axes = 6) {
  ImuStream s;
  s.sample_rate = rate;
  const std::size_t n = std::size_t(seconds * rate);
  s.samples.assign(axes, std::vector<double>(n));
  for (std::size_t a = 0; a < axes; ++a) {
    for (std::size_t t = 0; t < n; ++t) s.samples[a][t] = std::sin(2.0 * std::numbers::pi * freq * double(t) / rate + a);
  }
  return s;
}

ImuStream noise_stream(double seconds, std::uint64_t seed, std::size_t axes = 6) {
  Rng rng(seed);
  ImuStream s;
  const std::size_t n = std::size_t(seconds * 1000.0);
  s.samples.assign(axes, std::vector<double>(n));
  for (auto& axis : s.samples) {
    for (auto& v : axis) v = normal01(rng);
  }
  return s;
}

}  // namespace

TEST_CASE("high-pass design matches the analytic Butterworth response") {
  const auto sections = butterworth_highpass(4, 20.0, 1000.0);
  CHECK(sections.size() == 2);
  for (double f : {1.0, 5.0, 10.0, 19.0, 20.0, 21.0, 40.0, 100.0, 300.0, 499.0}) {
    CHECK(cascade_magnitude(sections, f, 1000.0) ==
          doctest::Approx(testsupport::butterworth_highpass_magnitude(f, 20.0, 1000.0, 4)).epsilon(1e-9));
  }
  CHECK(20.0 * std::log10(cascade_magnitude(sections, 20.0, 1000.0)) == doctest::Approx(-3.0103).epsilon(1e-4));
}

TEST_CASE("filtered sines follow the design response") {
  for (double f : {5.0, 20.0, 100.0}) {
    const ImuStream y = highpass_filter(sine_stream(f, 10.0), 20.0);
    const double amp = testsupport::tone_amplitude(y.samples[0], f, 1000.0, 5000, 10000);
    CHECK(amp == doctest::Approx(testsupport::butterworth_highpass_magnitude(f, 20.0, 1000.0, 4)).epsilon(1e-3));
  }
}

TEST_CASE("DC is rejected") {
  ImuStream s;
  s.samples.assign(6, std::vector<double>(3000, 2.5));
  const ImuStream y = highpass_filter(s);
  double mean = 0.0;
  for (std::size_t t = 1000; t < 3000; ++t) mean += std::abs(y.samples[2][t]);
  CHECK(mean / 2000.0 < 1e-3 * 2.5);
}

TEST_CASE("high-pass is linear and causal") {
  const ImuStream a = noise_stream(1.0, 1), b = noise_stream(1.0, 2);
  ImuStream sum = a;
  for (std::size_t x = 0; x < 6; ++x) {
    for (std::size_t t = 0; t < a.length(); ++t) sum.samples[x][t] += b.samples[x][t];
  }
  const auto ya = highpass_filter(a), yb = highpass_filter(b), ys = highpass_filter(sum);
  for (std::size_t t = 0; t < a.length(); ++t) {
    CHECK(ys.samples[1][t] == doctest::Approx(ya.samples[1][t] + yb.samples[1][t]).epsilon(1e-6).scale(1.0));
  }
  ImuStream c = a;
  c.samples[0][500] += 10.0;
  const auto yc = highpass_filter(c);
  for (std::size_t t = 0; t < 500; ++t) CHECK(yc.samples[0][t] == ya.samples[0][t]);
}

TEST_CASE("invalid cutoff is rejected") {
  CHECK_THROWS_AS(highpass_filter(noise_stream(0.1, 1), 600.0), std::invalid_argument);
  CHECK_THROWS_AS(highpass_filter(noise_stream(0.1, 1), 0.0), std::invalid_argument);
}

TEST_CASE("axis selection") {
  const ImuStream s = noise_stream(0.1, 3);
  CHECK(select_axes(s, ImuMode::all).samples == s.samples);
  const auto acc = select_axes(s, ImuMode::accel);
  REQUIRE(acc.axes() == 3);
  CHECK(acc.samples[2] == s.samples[2]);
  const auto gyro = select_axes(s, ImuMode::gyro);
  REQUIRE(gyro.axes() == 3);
  CHECK(gyro.samples[0] == s.samples[3]);
  CHECK(parse_imu_mode("GYRO") == ImuMode::gyro);
  CHECK_THROWS(parse_imu_mode("magnet"));
}

TEST_CASE("IMU encoder frame counts, bias output and causality") {
  ImuEncoderConfig cfg;
  const auto p = ImuEncoderParams::random(cfg, 7);
  CHECK(cfg.stride_product() == 80);
  CHECK(encode_imu(noise_stream(1.0, 4), cfg, p).rows() == 12);
  CHECK(encode_imu(noise_stream(1.0, 4), cfg, p).cols() == 16);

  ImuStream zero;
  zero.samples.assign(6, std::vector<double>(2000, 0.0));
  const MatrixF z = encode_imu(zero, cfg, p);
  // Zero padding at the start settles after three frames.
  for (std::size_t t = 4; t < z.rows(); ++t) CHECK(testsupport::max_abs_diff(z.slice_rows(t, t + 1), z.slice_rows(3, 4)) == 0.0);

  const ImuStream a = noise_stream(2.0, 5);
  ImuStream b = a;
  for (auto& axis : b.samples) {
    for (std::size_t t = 800; t < axis.size(); ++t) axis[t] += 1.0;
  }
  const MatrixF ya = encode_imu(a, cfg, p), yb = encode_imu(b, cfg, p);
  // Frame t covers samples < 80 (t + 1).
  for (std::size_t t = 0; t < 10; ++t) CHECK(testsupport::max_abs_diff(ya.slice_rows(t, t + 1), yb.slice_rows(t, t + 1)) == 0.0);
  CHECK(testsupport::max_abs_diff(ya.slice_rows(10, 11), yb.slice_rows(10, 11)) > 0.0);

  ImuEncoderConfig bad = cfg;
  bad.strides = {2, 2, 4, 4};
  CHECK_THROWS_AS(encode_imu(a, bad, ImuEncoderParams::random(bad, 1)), std::invalid_argument);
}

TEST_CASE("fuse concatenates and aligns by at most one frame") {
  const MatrixF audio = testsupport::random_matrix(10, 32, 1), imu = testsupport::random_matrix(10, 16, 2);
  const auto f = fuse(audio, imu, 0.08);
  CHECK(f.frames.cols() == 48);
  CHECK(f.frame_hop == 0.08);
  for (std::size_t t = 0; t < 10; ++t) {
    for (std::size_t d = 0; d < 32; ++d) CHECK(f.frames(t, d) == audio(t, d));
    for (std::size_t d = 0; d < 16; ++d) CHECK(f.frames(t, 32 + d) == imu(t, d));
  }
  const auto zero = fuse(audio, MatrixF(10, 16));
  for (std::size_t t = 0; t < 10; ++t) {
    for (std::size_t d = 0; d < 32; ++d) CHECK(zero.frames(t, d) == audio(t, d));
  }
  CHECK(fuse(audio, testsupport::random_matrix(9, 16, 3)).frames.rows() == 10);
  CHECK(fuse(audio, testsupport::random_matrix(11, 16, 3)).frames.rows() == 10);
  CHECK_THROWS_AS(fuse(audio, testsupport::random_matrix(12, 16, 3)), std::invalid_argument);
}

TEST_CASE("read IMU line records") {
  const auto path = std::filesystem::temp_directory_path() / "glassasr_imu_test.csv";
  {
    std::ofstream out(path);
    out << "# t ax ay az gx gy gz\n";
    for (int t = 0; t < 50; ++t) out << t << ", 0.1, 0.2, 0.3, 1, 2, " << t << "\n";
  }
  const ImuStream s = read_imu(path);
  CHECK(s.axes() == 6);
  CHECK(s.length() == 50);
  CHECK(s.sample_rate == doctest::Approx(1000.0));
  CHECK(s.samples[5][7] == 7.0);
  {
    std::ofstream out(path);
    out << "0 1 2 3\n";
  }
  CHECK_THROWS_AS(read_imu(path), DataError);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_imu(path), DataError);
}
