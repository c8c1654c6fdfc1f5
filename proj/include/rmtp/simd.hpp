#pragma once

#include <complex>
#include <cstddef>

namespace rmtp::simd {

enum class Isa { Scalar, Avx2 };

// Best instruction set supported by this CPU; RMTP_SIMD=scalar forces the reference path.
Isa active_isa();
const char* isa_name(Isa isa);
bool avx2_available();

// Sums over atoms x_i = e^{s_i} with weights w_i of
//   w(1/(1-xz) - 1), w x/(1-xz)^2, 2 w x^2/(1-xz)^3, 6 w x^3/(1-xz)^4,
// i.e. M(z) and its first three derivatives. min_gap receives min |1 - x z|^2.
struct MSums {
  std::complex<double> m, d1, d2, d3;
};

MSums atomic_m_sums(const double* x, const double* w, std::size_t n, std::complex<double> z,
                    double* min_gap);
std::complex<double> weighted_sum(const std::complex<double>* f, const std::complex<double>* w,
                                  std::size_t n);
// out[k] = sum_i x_i^k for k = 0..kmax.
void power_sums(const double* x, std::size_t n, int kmax, double* out);

namespace scalar {
MSums atomic_m_sums(const double* x, const double* w, std::size_t n, std::complex<double> z,
                    double* min_gap);
std::complex<double> weighted_sum(const std::complex<double>* f, const std::complex<double>* w,
                                  std::size_t n);
void power_sums(const double* x, std::size_t n, int kmax, double* out);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define RMTP_HAVE_AVX2_TU 1
namespace avx2 {
MSums atomic_m_sums(const double* x, const double* w, std::size_t n, std::complex<double> z,
                    double* min_gap);
std::complex<double> weighted_sum(const std::complex<double>* f, const std::complex<double>* w,
                                  std::size_t n);
void power_sums(const double* x, std::size_t n, int kmax, double* out);
}  // namespace avx2
#endif

}  // namespace rmtp::simd
