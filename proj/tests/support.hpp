#pragma once

// Shared fixtures and independent reference implementations for the unit
// tests and the acceptance runner.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "glassasr/encoder.hpp"
#include "glassasr/matrix.hpp"
#include "glassasr/types.hpp"
#include "glassasr/beamform.hpp"

namespace testsupport {

using glassasr::MatrixF;

MatrixF random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed, float scale = 1.0f);
double max_abs_diff(const MatrixF& a, const MatrixF& b);

// Direct per-cell statement of the attention rule.
bool mask_cell(std::size_t i, std::size_t j, std::size_t frames, std::size_t chunk, std::size_t left,
               std::size_t right_chunks);

struct StreamTrace {
  MatrixF output;
  std::vector<std::size_t> occupancy;         // after each step
  std::vector<std::size_t> elements;          // attention cache elements after each step
  std::vector<std::size_t> conv_rows;         // conv cache rows after each step
  std::vector<std::size_t> released_per_step;
};

// Feeds features chunk by chunk (the last chunk may be short) and
// concatenates the released rows.
StreamTrace run_streaming(const MatrixF& features, const MatrixF& aux, const glassasr::EncoderConfig& config,
                          const glassasr::EncoderParams& params);

// Plain-loop encoder: explicit per-cell mask, no caches, no kernels.
MatrixF reference_encoder(const MatrixF& features, const glassasr::EncoderConfig& config,
                          const glassasr::EncoderParams& params);

// Minimal edit cost by exhaustive enumeration of every alignment path.
double brute_force_alignment_cost(std::span<const glassasr::WordRecord> ref,
                                  std::span<const glassasr::EmittedToken> hyp, double attribution_cost);

// |H(f)| of an order-n Butterworth high-pass after the bilinear transform
// with prewarping: 1 / sqrt(1 + (tan(pi fc / fs) / tan(pi f / fs))^(2n)).
double butterworth_highpass_magnitude(double f, double cutoff, double rate, int order);

// Ideal narrowband response |sum_c exp(j w (tau_steer_c - tau_src_c))| of a
// delay-and-sum beam steered to `steer` for a plane wave from `source`.
double das_array_response(std::span<const glassasr::Vec3> mics, const glassasr::Vec3& steer,
                          const glassasr::Vec3& source, double freq, double speed_of_sound = 343.0);

// Steady-state amplitude of x[begin:end) at frequency f by projection on
// sin/cos over that window.
double tone_amplitude(std::span<const double> x, double freq, double rate, std::size_t begin, std::size_t end);

}  // namespace testsupport
