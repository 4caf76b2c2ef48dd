#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "glassasr/kernels.hpp"
#include "glassasr/random.hpp"

using namespace glassasr;
using namespace glassasr::kernels;

namespace {

template <typename T>
std::vector<T> noise(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<T> v(n);
  for (auto& x : v) x = T(normal01(rng));
  return v;
}

struct IsaGuard {
  Isa saved = active_isa();
  ~IsaGuard() { set_active_isa(saved); }
};

}  // namespace

TEST_CASE("scalar is always available and first") {
  const auto isas = available_isas();
  REQUIRE(!isas.empty());
  CHECK(isas.front() == Isa::scalar);
  CHECK(isa_name(Isa::avx2) == "avx2");
}

TEST_CASE("SIMD kernels agree with the scalar reference") {
  IsaGuard guard;
  for (Isa isa : available_isas()) {
    INFO("isa " << isa_name(isa));
    for (std::size_t n : {0u, 1u, 3u, 7u, 8u, 9u, 16u, 31u, 64u, 67u, 1000u}) {
      const auto af = noise<float>(n, n + 1), bf = noise<float>(n, n + 2);
      const auto ad = noise<double>(n, n + 3), bd = noise<double>(n, n + 4);

      set_active_isa(Isa::scalar);
      const float ref_f = dot(af, bf);
      const double ref_d = dot(ad, bd);
      auto yf_ref = bf;
      axpy(0.75f, af, yf_ref);
      auto yd_ref = bd;
      axpy(-1.25, ad, yd_ref);

      set_active_isa(isa);
      double mag_f = 0.0, mag_d = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        mag_f += std::abs(af[i] * bf[i]);
        mag_d += std::abs(ad[i] * bd[i]);
      }
      CHECK(std::abs(dot(af, bf) - ref_f) <= 1e-6 * (1.0 + mag_f));
      CHECK(std::abs(dot(ad, bd) - ref_d) <= 1e-14 * (1.0 + mag_d));
      auto yf = bf;
      axpy(0.75f, af, yf);
      auto yd = bd;
      axpy(-1.25, ad, yd);
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(std::abs(yf[i] - yf_ref[i]) <= 1e-6f);
        CHECK(std::abs(yd[i] - yd_ref[i]) <= 1e-14);
      }
    }
  }
}

TEST_CASE("gemv and FIR agree with direct loops on every ISA") {
  IsaGuard guard;
  const std::size_t rows = 13, cols = 37;
  const auto w = noise<float>(rows * cols, 1), x = noise<float>(cols, 2), b = noise<float>(rows, 3);
  const auto sig = noise<double>(300, 4), h = noise<double>(17, 5);
  for (Isa isa : available_isas()) {
    set_active_isa(isa);
    std::vector<float> out(rows);
    gemv(w, rows, cols, x, b, out);
    for (std::size_t r = 0; r < rows; ++r) {
      double s = b[r];
      for (std::size_t c = 0; c < cols; ++c) s += double(w[r * cols + c]) * x[c];
      CHECK(std::abs(out[r] - s) <= 1e-4);
    }
    std::vector<double> y(sig.size(), 0.0);
    fir_accumulate(sig, h, y);
    for (std::size_t t = 0; t < y.size(); ++t) {
      double s = 0.0;
      for (std::size_t m = 0; m < h.size() && m <= t; ++m) s += h[m] * sig[t - m];
      CHECK(std::abs(y[t] - s) <= 1e-12);
    }
  }
}

TEST_CASE("FIR with a delayed unit impulse is an exact shift on every ISA") {
  IsaGuard guard;
  const auto sig = noise<double>(257, 9);
  std::vector<double> h(40, 0.0);
  h[23] = 1.0;
  for (Isa isa : available_isas()) {
    set_active_isa(isa);
    std::vector<double> y(sig.size(), 0.0);
    fir_accumulate(sig, h, y);
    for (std::size_t t = 0; t < y.size(); ++t) CHECK(y[t] == (t >= 23 ? sig[t - 23] : 0.0));
  }
}

TEST_CASE("unavailable ISA is rejected") {
  IsaGuard guard;
  bool has_neon = false;
  for (Isa i : available_isas()) has_neon |= i == Isa::neon;
  if (!has_neon) CHECK_THROWS_AS(set_active_isa(Isa::neon), std::invalid_argument);
}
