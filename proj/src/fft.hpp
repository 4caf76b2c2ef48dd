#pragma once

// Thin RAII layer over FFTW for the real transforms used by the mel
// front-end and long-filter convolution. Plans are created under a global
// lock (FFTW's planner is not thread-safe); execution is reentrant.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace glassasr::detail {

class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const noexcept { return n_; }

  // in.size() == n, out.size() == n/2 + 1.
  void forward(std::span<const double> in, std::span<std::complex<double>> out);
  // Unnormalized inverse: in.size() == n/2 + 1, out.size() == n.
  void inverse(std::span<const std::complex<double>> in, std::span<double> out);

 private:
  std::size_t n_;
  void* forward_plan_;
  void* inverse_plan_;
  double* real_buf_;
  void* complex_buf_;
};

// Linear convolution truncated to out_len samples, via overlap-add.
std::vector<double> fft_convolve(std::span<const double> x, std::span<const double> h, std::size_t out_len);

}  // namespace glassasr::detail
