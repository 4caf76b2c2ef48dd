#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace glassasr {

// Filters with more non-zero taps than this go through FFT overlap-add instead of the direct
// SIMD kernel.
inline constexpr std::size_t kDirectConvolutionMaxTaps = 256;

// y[t] = sum_m h[m] x[t-m] for 0 <= t < x.size() (tail truncated).
std::vector<double> convolve_same(std::span<const double> x, std::span<const double> h);

}  // namespace glassasr
