#include "glassasr/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace glassasr::kernels {
namespace {

bool cpu_supports(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(GLASSASR_HAVE_AVX2)
      __builtin_cpu_init();
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::neon:
#if defined(GLASSASR_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const detail::KernelTable& table_for(Isa isa) {
  switch (isa) {
#if defined(GLASSASR_HAVE_AVX2)
    case Isa::avx2:
      return detail::avx2_table();
#endif
#if defined(GLASSASR_HAVE_NEON)
    case Isa::neon:
      return detail::neon_table();
#endif
    default:
      return detail::scalar_table();
  }
}

Isa initial_isa() {
  if (const char* env = std::getenv("GLASSASR_ISA")) {
    const std::string name(env);
    for (Isa isa : available_isas()) {
      if (isa_name(isa) == name) return isa;
    }
  }
  return detected_isa();
}

struct Dispatch {
  std::atomic<Isa> isa;
  std::atomic<const detail::KernelTable*> table;
  Dispatch() : isa(initial_isa()), table(&table_for(isa.load())) {}
};

Dispatch& dispatch() {
  static Dispatch d;
  return d;
}

const detail::KernelTable& active() { return *dispatch().table.load(std::memory_order_relaxed); }

void check_same_size(std::size_t a, std::size_t b) {
  if (a != b) throw std::invalid_argument("kernel operands differ in length");
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
    case Isa::neon:
      return "neon";
  }
  return "unknown";
}

Isa detected_isa() {
  if (cpu_supports(Isa::avx2)) return Isa::avx2;
  if (cpu_supports(Isa::neon)) return Isa::neon;
  return Isa::scalar;
}

std::vector<Isa> available_isas() {
  std::vector<Isa> out{Isa::scalar};
  for (Isa isa : {Isa::avx2, Isa::neon}) {
    if (cpu_supports(isa)) out.push_back(isa);
  }
  return out;
}

Isa active_isa() { return dispatch().isa.load(); }

void set_active_isa(Isa isa) {
  if (!cpu_supports(isa)) throw std::invalid_argument("ISA not available: " + std::string(isa_name(isa)));
  dispatch().isa.store(isa);
  dispatch().table.store(&table_for(isa));
}

float dot(std::span<const float> a, std::span<const float> b) {
  check_same_size(a.size(), b.size());
  return active().dot_f32(a.data(), b.data(), a.size());
}

double dot(std::span<const double> a, std::span<const double> b) {
  check_same_size(a.size(), b.size());
  return active().dot_f64(a.data(), b.data(), a.size());
}

void axpy(float alpha, std::span<const float> x, std::span<float> y) {
  check_same_size(x.size(), y.size());
  active().axpy_f32(alpha, x.data(), y.data(), x.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  check_same_size(x.size(), y.size());
  active().axpy_f64(alpha, x.data(), y.data(), x.size());
}

void fir_accumulate(std::span<const double> x, std::span<const double> h, std::span<double> y) {
  if (y.size() > x.size()) throw std::invalid_argument("fir_accumulate: output longer than input");
  const auto& k = active();
  const std::size_t n = y.size();
  // One axpy per tap keeps the per-sample summation order fixed (tap 0 first)
  // across ISAs.
  for (std::size_t m = 0; m < h.size() && m < n; ++m) {
    if (h[m] == 0.0) continue;
    k.axpy_f64(h[m], x.data(), y.data() + m, n - m);
  }
}

void gemv(std::span<const float> w, std::size_t rows, std::size_t cols, std::span<const float> x,
          std::span<const float> bias, std::span<float> out) {
  if (w.size() != rows * cols || x.size() != cols || out.size() != rows || (!bias.empty() && bias.size() != rows)) {
    throw std::invalid_argument("gemv: shape mismatch");
  }
  const auto& k = active();
  for (std::size_t r = 0; r < rows; ++r) {
    float v = k.dot_f32(w.data() + r * cols, x.data(), cols);
    out[r] = bias.empty() ? v : v + bias[r];
  }
}

}  // namespace glassasr::kernels
