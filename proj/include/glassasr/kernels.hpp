#pragma once

// Data-parallel inner loops used by the signal and encoder paths.
//
// Every kernel has a scalar reference implementation plus SIMD variants
// (AVX2+FMA on x86-64, NEON on AArch64). The variant is picked once at
// startup from the CPU feature set and may be overridden with
// GLASSASR_ISA={scalar,avx2,neon} or set_active_isa(). SIMD variants agree
// with the scalar reference up to floating-point reassociation; tests pin
// the tolerance.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace glassasr::kernels {

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa);

// Best ISA the running CPU supports.
Isa detected_isa();

// ISAs both compiled in and supported by this CPU, scalar first.
std::vector<Isa> available_isas();

Isa active_isa();

// Throws std::invalid_argument if `isa` is not available.
void set_active_isa(Isa isa);

float dot(std::span<const float> a, std::span<const float> b);
double dot(std::span<const double> a, std::span<const double> b);

// y += alpha * x
void axpy(float alpha, std::span<const float> x, std::span<float> y);
void axpy(double alpha, std::span<const double> x, std::span<double> y);

// Same-length causal FIR, accumulated into y:
//   y[t] += sum_m h[m] * x[t - m],  0 <= t < y.size()
// with x[t] = 0 outside [0, x.size()). Requires y.size() <= x.size().
void fir_accumulate(std::span<const double> x, std::span<const double> h, std::span<double> y);

// out[r] = dot(w.row(r), x) + bias[r] for a row-major [rows][cols] matrix.
void gemv(std::span<const float> w, std::size_t rows, std::size_t cols, std::span<const float> x,
          std::span<const float> bias, std::span<float> out);

namespace detail {

struct KernelTable {
  float (*dot_f32)(const float*, const float*, std::size_t);
  double (*dot_f64)(const double*, const double*, std::size_t);
  void (*axpy_f32)(float, const float*, float*, std::size_t);
  void (*axpy_f64)(double, const double*, double*, std::size_t);
};

const KernelTable& scalar_table();
#if defined(GLASSASR_HAVE_AVX2)
const KernelTable& avx2_table();
#endif
#if defined(GLASSASR_HAVE_NEON)
const KernelTable& neon_table();
#endif

}  // namespace detail
}  // namespace glassasr::kernels
