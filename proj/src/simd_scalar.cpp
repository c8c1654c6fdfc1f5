#include "rmtp/simd.hpp"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <vector>

namespace rmtp::simd {

namespace scalar {

MSums atomic_m_sums(const double* x, const double* w, std::size_t n, std::complex<double> z,
                    double* min_gap) {
  MSums s{};
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    std::complex<double> d = 1.0 - x[i] * z;
    gap = std::min(gap, std::norm(d));
    std::complex<double> inv = 1.0 / d;
    std::complex<double> g = x[i] * inv;
    std::complex<double> g2 = g * inv;
    s.m += w[i] * (inv - 1.0);
    s.d1 += w[i] * g2;
    s.d2 += 2.0 * w[i] * g * g2;
    s.d3 += 6.0 * w[i] * g * g * g2;
  }
  if (min_gap) *min_gap = gap;
  return s;
}

std::complex<double> weighted_sum(const std::complex<double>* f, const std::complex<double>* w,
                                  std::size_t n) {
  std::complex<double> acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += f[i] * w[i];
  return acc;
}

void power_sums(const double* x, std::size_t n, int kmax, double* out) {
  for (int k = 0; k <= kmax; ++k) out[k] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double p = 1.0;
    for (int k = 0; k <= kmax; ++k) {
      out[k] += p;
      p *= x[i];
    }
  }
}

}  // namespace scalar

bool avx2_available() {
#if defined(RMTP_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok;
#else
  return false;
#endif
}

Isa active_isa() {
  static const Isa isa = [] {
    const char* env = std::getenv("RMTP_SIMD");
    if (env && std::strcmp(env, "scalar") == 0) return Isa::Scalar;
    return avx2_available() ? Isa::Avx2 : Isa::Scalar;
  }();
  return isa;
}

const char* isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

MSums atomic_m_sums(const double* x, const double* w, std::size_t n, std::complex<double> z,
                    double* min_gap) {
#ifdef RMTP_HAVE_AVX2_TU
  if (active_isa() == Isa::Avx2) return avx2::atomic_m_sums(x, w, n, z, min_gap);
#endif
  return scalar::atomic_m_sums(x, w, n, z, min_gap);
}

std::complex<double> weighted_sum(const std::complex<double>* f, const std::complex<double>* w,
                                  std::size_t n) {
#ifdef RMTP_HAVE_AVX2_TU
  if (active_isa() == Isa::Avx2) return avx2::weighted_sum(f, w, n);
#endif
  return scalar::weighted_sum(f, w, n);
}

void power_sums(const double* x, std::size_t n, int kmax, double* out) {
#ifdef RMTP_HAVE_AVX2_TU
  if (active_isa() == Isa::Avx2) return avx2::power_sums(x, n, kmax, out);
#endif
  scalar::power_sums(x, n, kmax, out);
}

}  // namespace rmtp::simd
