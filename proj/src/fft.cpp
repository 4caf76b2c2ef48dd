#include "fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <mutex>

namespace glassasr::detail {
namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

RealFft::RealFft(std::size_t n) : n_(n) {
  real_buf_ = fftw_alloc_real(n);
  complex_buf_ = fftw_alloc_complex(n / 2 + 1);
  auto* cbuf = static_cast<fftw_complex*>(complex_buf_);
  std::lock_guard lock(planner_mutex());
  forward_plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), real_buf_, cbuf, FFTW_ESTIMATE);
  inverse_plan_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), cbuf, real_buf_, FFTW_ESTIMATE);
}

RealFft::~RealFft() {
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
    fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
  }
  fftw_free(real_buf_);
  fftw_free(complex_buf_);
}

void RealFft::forward(std::span<const double> in, std::span<std::complex<double>> out) {
  std::copy(in.begin(), in.end(), real_buf_);
  fftw_execute(static_cast<fftw_plan>(forward_plan_));
  std::memcpy(out.data(), complex_buf_, sizeof(fftw_complex) * (n_ / 2 + 1));
}

void RealFft::inverse(std::span<const std::complex<double>> in, std::span<double> out) {
  std::memcpy(complex_buf_, in.data(), sizeof(fftw_complex) * (n_ / 2 + 1));
  fftw_execute(static_cast<fftw_plan>(inverse_plan_));
  std::copy(real_buf_, real_buf_ + n_, out.begin());
}

std::vector<double> fft_convolve(std::span<const double> x, std::span<const double> h, std::size_t out_len) {
  std::vector<double> y(out_len, 0.0);
  if (h.empty() || x.empty() || out_len == 0) return y;
  std::size_t n = 1;
  while (n < 2 * h.size()) n <<= 1;
  n = std::max<std::size_t>(n, 1024);
  const std::size_t block = n - h.size() + 1;
  const std::size_t bins = n / 2 + 1;

  RealFft fft(n);
  std::vector<double> buf(n, 0.0);
  std::vector<std::complex<double>> hf(bins), xf(bins);
  std::copy(h.begin(), h.end(), buf.begin());
  fft.forward(buf, hf);

  const std::size_t x_used = std::min(x.size(), out_len);
  for (std::size_t start = 0; start < x_used; start += block) {
    const std::size_t len = std::min(block, x_used - start);
    std::fill(buf.begin(), buf.end(), 0.0);
    std::copy(x.begin() + start, x.begin() + start + len, buf.begin());
    fft.forward(buf, xf);
    for (std::size_t k = 0; k < bins; ++k) xf[k] *= hf[k];
    fft.inverse(xf, buf);
    const std::size_t span = std::min(n, out_len - start);
    for (std::size_t i = 0; i < span; ++i) y[start + i] += buf[i] / double(n);
  }
  return y;
}

}  // namespace glassasr::detail

#include "glassasr/dsp.hpp"
#include "glassasr/kernels.hpp"

namespace glassasr {

std::vector<double> convolve_same(std::span<const double> x, std::span<const double> h) {
  // The direct kernel skips zero taps, so sparse filters (delayed impulses)
  // stay on the exact direct path whatever their length.
  std::size_t nonzero = 0;
  for (double v : h) nonzero += v != 0.0;
  if (nonzero > kDirectConvolutionMaxTaps) return detail::fft_convolve(x, h, x.size());
  std::vector<double> y(x.size(), 0.0);
  kernels::fir_accumulate(x, h, y);
  return y;
}

}  // namespace glassasr
