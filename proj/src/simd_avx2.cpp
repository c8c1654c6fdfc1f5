// Compiled with -mavx2 -mfma; only reached after the runtime check in simd_scalar.cpp.
#include <immintrin.h>

#include <algorithm>
#include <limits>
#include <vector>

#include "rmtp/simd.hpp"

namespace rmtp::simd::avx2 {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

inline double hmin(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_min_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_min_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

// (ar + i ai)(br + i bi) on four lanes
inline void cmul(__m256d ar, __m256d ai, __m256d br, __m256d bi, __m256d& cr, __m256d& ci) {
  cr = _mm256_fmsub_pd(ar, br, _mm256_mul_pd(ai, bi));
  ci = _mm256_fmadd_pd(ar, bi, _mm256_mul_pd(ai, br));
}

}  // namespace

MSums atomic_m_sums(const double* x, const double* w, std::size_t n, std::complex<double> z,
                    double* min_gap) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d zr = _mm256_set1_pd(z.real()), zi = _mm256_set1_pd(z.imag());
  __m256d mr = _mm256_setzero_pd(), mi = _mm256_setzero_pd();
  __m256d d1r = mr, d1i = mr, d2r = mr, d2i = mr, d3r = mr, d3i = mr;
  __m256d gap = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d xv = _mm256_loadu_pd(x + i), wv = _mm256_loadu_pd(w + i);
    __m256d dr = _mm256_fnmadd_pd(xv, zr, one);
    __m256d di = _mm256_sub_pd(_mm256_setzero_pd(), _mm256_mul_pd(xv, zi));
    __m256d nrm = _mm256_fmadd_pd(dr, dr, _mm256_mul_pd(di, di));
    gap = _mm256_min_pd(gap, nrm);
    __m256d q = _mm256_div_pd(one, nrm);
    __m256d ir = _mm256_mul_pd(dr, q);
    __m256d ii = _mm256_sub_pd(_mm256_setzero_pd(), _mm256_mul_pd(di, q));
    __m256d gr = _mm256_mul_pd(xv, ir), gi = _mm256_mul_pd(xv, ii);
    __m256d g2r, g2i, g3r, g3i, g4r, g4i;
    cmul(gr, gi, ir, ii, g2r, g2i);
    cmul(gr, gi, g2r, g2i, g3r, g3i);
    cmul(gr, gi, g3r, g3i, g4r, g4i);
    mr = _mm256_fmadd_pd(wv, _mm256_sub_pd(ir, one), mr);
    mi = _mm256_fmadd_pd(wv, ii, mi);
    d1r = _mm256_fmadd_pd(wv, g2r, d1r);
    d1i = _mm256_fmadd_pd(wv, g2i, d1i);
    d2r = _mm256_fmadd_pd(wv, g3r, d2r);
    d2i = _mm256_fmadd_pd(wv, g3i, d2i);
    d3r = _mm256_fmadd_pd(wv, g4r, d3r);
    d3i = _mm256_fmadd_pd(wv, g4i, d3i);
  }
  MSums s;
  s.m = {hsum(mr), hsum(mi)};
  s.d1 = {hsum(d1r), hsum(d1i)};
  s.d2 = 2.0 * std::complex<double>(hsum(d2r), hsum(d2i));
  s.d3 = 6.0 * std::complex<double>(hsum(d3r), hsum(d3i));
  double g = hmin(gap);
  if (i < n) {
    double tail_gap;
    MSums t = scalar::atomic_m_sums(x + i, w + i, n - i, z, &tail_gap);
    s.m += t.m;
    s.d1 += t.d1;
    s.d2 += t.d2;
    s.d3 += t.d3;
    g = std::min(g, tail_gap);
  }
  if (min_gap) *min_gap = g;
  return s;
}

std::complex<double> weighted_sum(const std::complex<double>* f, const std::complex<double>* w,
                                  std::size_t n) {
  const double* fp = reinterpret_cast<const double*>(f);
  const double* wp = reinterpret_cast<const double*>(w);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d a = _mm256_loadu_pd(fp + 2 * i);
    __m256d b = _mm256_loadu_pd(wp + 2 * i);
    __m256d bre = _mm256_movedup_pd(b);
    __m256d bim = _mm256_permute_pd(b, 0xF);
    __m256d asw = _mm256_permute_pd(a, 0x5);
    acc = _mm256_add_pd(acc, _mm256_fmaddsub_pd(a, bre, _mm256_mul_pd(asw, bim)));
  }
  alignas(32) double t[4];
  _mm256_store_pd(t, acc);
  std::complex<double> r(t[0] + t[2], t[1] + t[3]);
  for (; i < n; ++i) r += f[i] * w[i];
  return r;
}

void power_sums(const double* x, std::size_t n, int kmax, double* out) {
  // accumulators stored as 4 lanes per power
  std::vector<double> acc(4 * (static_cast<std::size_t>(kmax) + 1), 0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d xv = _mm256_loadu_pd(x + i);
    __m256d p = _mm256_set1_pd(1.0);
    for (int k = 0; k <= kmax; ++k) {
      double* a = acc.data() + 4 * k;
      _mm256_storeu_pd(a, _mm256_add_pd(_mm256_loadu_pd(a), p));
      p = _mm256_mul_pd(p, xv);
    }
  }
  for (int k = 0; k <= kmax; ++k) out[k] = hsum(_mm256_loadu_pd(acc.data() + 4 * k));
  if (i < n) {
    std::vector<double> tail(static_cast<std::size_t>(kmax) + 1);
    scalar::power_sums(x + i, n - i, kmax, tail.data());
    for (int k = 0; k <= kmax; ++k) out[k] += tail[k];
  }
}

}  // namespace rmtp::simd::avx2
