#include "rmtp/bigfloat.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace rmtp::mp {

namespace {

template <class F>
Real unary(const Real& a, F f) {
  Real r(a.prec());
  f(r.get(), a.get(), MPFR_RNDN);
  return r;
}

template <class F>
Real binary(const Real& a, const Real& b, F f) {
  Real r(std::max(a.prec(), b.prec()));
  f(r.get(), a.get(), b.get(), MPFR_RNDN);
  return r;
}

}  // namespace

double Real::log_abs() const {
  if (mpfr_zero_p(v_)) return -INFINITY;
  long e;
  double d = mpfr_get_d_2exp(&e, v_, MPFR_RNDN);
  return std::log(std::abs(d)) + static_cast<double>(e) * std::log(2.0);
}

Real operator+(const Real& a, const Real& b) { return binary(a, b, mpfr_add); }
Real operator-(const Real& a, const Real& b) { return binary(a, b, mpfr_sub); }
Real operator*(const Real& a, const Real& b) { return binary(a, b, mpfr_mul); }
Real operator/(const Real& a, const Real& b) { return binary(a, b, mpfr_div); }
Real operator-(const Real& a) { return unary(a, mpfr_neg); }
Real sqrt(const Real& a) { return unary(a, mpfr_sqrt); }
Real exp(const Real& a) { return unary(a, mpfr_exp); }
Real cos(const Real& a) { return unary(a, mpfr_cos); }
Real sin(const Real& a) { return unary(a, mpfr_sin); }
Real abs(const Real& a) { return unary(a, mpfr_abs); }
bool operator<(const Real& a, const Real& b) { return mpfr_less_p(a.get(), b.get()) != 0; }

Complex operator+(const Complex& a, const Complex& b) { return {a.re + b.re, a.im + b.im}; }
Complex operator-(const Complex& a, const Complex& b) { return {a.re - b.re, a.im - b.im}; }
Complex operator*(const Complex& a, const Complex& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
Complex operator/(const Complex& a, const Complex& b) {
  Real d = b.norm();
  return {(a.re * b.re + a.im * b.im) / d, (a.im * b.re - a.re * b.im) / d};
}
Complex conj(const Complex& a) { return {a.re, -a.im}; }
Complex exp(const Complex& a) {
  Real m = exp(a.re);
  return {m * cos(a.im), m * sin(a.im)};
}

std::complex<double> ratio_to_complex(const Complex& a, const Complex& b) { return (a / b).to_complex(); }

Matrix::Matrix(int r, int c, mpfr_prec_t prec) : rows(r), cols(c) {
  a.reserve(static_cast<std::size_t>(r) * c);
  for (int k = 0; k < r * c; ++k) a.emplace_back(prec);
}

Complex determinant(Matrix m) {
  int n = m.rows;
  mpfr_prec_t prec = m.prec();
  Complex det(std::complex<double>(1.0, 0.0), prec);
  for (int k = 0; k < n; ++k) {
    int piv = k;
    Real best = m(k, k).norm();
    for (int i = k + 1; i < n; ++i) {
      Real v = m(i, k).norm();
      if (best < v) {
        best = std::move(v);
        piv = i;
      }
    }
    if (best.is_zero()) return Complex(prec);
    if (piv != k) {
      for (int j = 0; j < n; ++j) std::swap(m(k, j), m(piv, j));
      det.re = -det.re;
      det.im = -det.im;
    }
    det = det * m(k, k);
    for (int i = k + 1; i < n; ++i) {
      Complex f = m(i, k) / m(k, k);
      for (int j = k + 1; j < n; ++j) m(i, j) = m(i, j) - f * m(k, j);
    }
  }
  return det;
}

void left_multiply(const std::vector<std::complex<double>>& y, int n, const Matrix& b, Matrix& c, mpfr_prec_t prec) {
  // Y entries as 53-bit numbers so every update is a single fused multiply-add
  std::vector<Real> yr, yi, yin;
  yr.reserve(y.size());
  yi.reserve(y.size());
  yin.reserve(y.size());
  for (const auto& v : y) {
    yr.emplace_back(v.real(), 53);
    yi.emplace_back(v.imag(), 53);
    yin.emplace_back(-v.imag(), 53);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < b.cols; ++j) {
      Complex& out = c(i, j);
      if (out.re.prec() != prec) {
        mpfr_set_prec(out.re.get(), prec);
        mpfr_set_prec(out.im.get(), prec);
      }
      mpfr_set_zero(out.re.get(), 1);
      mpfr_set_zero(out.im.get(), 1);
      for (int l = 0; l < n; ++l) {
        std::size_t k = static_cast<std::size_t>(i) * n + l;
        const Complex& bv = b(l, j);
        mpfr_fma(out.re.get(), yr[k].get(), bv.re.get(), out.re.get(), MPFR_RNDN);
        mpfr_fma(out.re.get(), yin[k].get(), bv.im.get(), out.re.get(), MPFR_RNDN);
        mpfr_fma(out.im.get(), yr[k].get(), bv.im.get(), out.im.get(), MPFR_RNDN);
        mpfr_fma(out.im.get(), yi[k].get(), bv.re.get(), out.im.get(), MPFR_RNDN);
      }
    }
  }
}

std::vector<double> jacobi_log_sv2(Matrix m, int max_sweeps) {
  int rows = m.rows, n = m.cols;
  mpfr_prec_t prec = m.prec();
  // raw MPFR with preallocated temporaries; this loop dominates the big-float backend
  Real tol(prec), alpha(prec), beta(prec), gr(prec), gi(prec), ag(prec), lhs(prec), zeta(prec), t(prec),
      c(prec), s(prec), pr(prec), pi(prec), tmp(prec), xr(prec), xi(prec), qr(prec), qi(prec);
  mpfr_set_ui_2exp(tol.get(), 1, -static_cast<long>(prec - 16), MPFR_RNDN);
  std::vector<Real> norms;
  for (int p = 0; p < n; ++p) norms.emplace_back(prec);
  auto col_norm = [&](int p, Real& out) {
    mpfr_set_zero(out.get(), 1);
    for (int i = 0; i < rows; ++i) {
      mpfr_fma(out.get(), m(i, p).re.get(), m(i, p).re.get(), out.get(), MPFR_RNDN);
      mpfr_fma(out.get(), m(i, p).im.get(), m(i, p).im.get(), out.get(), MPFR_RNDN);
    }
  };
  for (int p = 0; p < n; ++p) col_norm(p, norms[p]);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        // g = sum conj(a_ip) a_iq
        mpfr_set_zero(gr.get(), 1);
        mpfr_set_zero(gi.get(), 1);
        for (int i = 0; i < rows; ++i) {
          const Complex& ap = m(i, p);
          const Complex& aq = m(i, q);
          mpfr_fma(gr.get(), ap.re.get(), aq.re.get(), gr.get(), MPFR_RNDN);
          mpfr_fma(gr.get(), ap.im.get(), aq.im.get(), gr.get(), MPFR_RNDN);
          mpfr_fma(gi.get(), ap.re.get(), aq.im.get(), gi.get(), MPFR_RNDN);
          mpfr_fms(tmp.get(), ap.im.get(), aq.re.get(), gi.get(), MPFR_RNDN);
          mpfr_neg(gi.get(), tmp.get(), MPFR_RNDN);
        }
        mpfr_hypot(ag.get(), gr.get(), gi.get(), MPFR_RNDN);
        if (mpfr_zero_p(ag.get())) continue;
        mpfr_mul(lhs.get(), norms[p].get(), norms[q].get(), MPFR_RNDN);
        mpfr_sqrt(lhs.get(), lhs.get(), MPFR_RNDN);
        mpfr_mul(lhs.get(), lhs.get(), tol.get(), MPFR_RNDN);
        if (!mpfr_less_p(lhs.get(), ag.get())) continue;
        rotated = true;
        // zeta = (beta - alpha)/(2|g|), t = sign(zeta)/(|zeta| + sqrt(1 + zeta^2))
        mpfr_sub(zeta.get(), norms[q].get(), norms[p].get(), MPFR_RNDN);
        mpfr_div(zeta.get(), zeta.get(), ag.get(), MPFR_RNDN);
        mpfr_div_2ui(zeta.get(), zeta.get(), 1, MPFR_RNDN);
        mpfr_sqr(tmp.get(), zeta.get(), MPFR_RNDN);
        mpfr_add_ui(tmp.get(), tmp.get(), 1, MPFR_RNDN);
        mpfr_sqrt(tmp.get(), tmp.get(), MPFR_RNDN);
        mpfr_abs(t.get(), zeta.get(), MPFR_RNDN);
        mpfr_add(t.get(), t.get(), tmp.get(), MPFR_RNDN);
        mpfr_ui_div(t.get(), 1, t.get(), MPFR_RNDN);
        if (mpfr_sgn(zeta.get()) < 0) mpfr_neg(t.get(), t.get(), MPFR_RNDN);
        mpfr_sqr(c.get(), t.get(), MPFR_RNDN);
        mpfr_add_ui(c.get(), c.get(), 1, MPFR_RNDN);
        mpfr_rec_sqrt(c.get(), c.get(), MPFR_RNDN);
        mpfr_mul(s.get(), c.get(), t.get(), MPFR_RNDN);
        // phase conj(g)/|g|
        mpfr_div(pr.get(), gr.get(), ag.get(), MPFR_RNDN);
        mpfr_div(pi.get(), gi.get(), ag.get(), MPFR_RNDN);
        mpfr_neg(pi.get(), pi.get(), MPFR_RNDN);
        for (int i = 0; i < rows; ++i) {
          Complex& ap = m(i, p);
          Complex& aq = m(i, q);
          // (qr, qi) = phase * a_iq
          mpfr_mul(qr.get(), pr.get(), aq.re.get(), MPFR_RNDN);
          mpfr_mul(tmp.get(), pi.get(), aq.im.get(), MPFR_RNDN);
          mpfr_sub(qr.get(), qr.get(), tmp.get(), MPFR_RNDN);
          mpfr_mul(qi.get(), pr.get(), aq.im.get(), MPFR_RNDN);
          mpfr_fma(qi.get(), pi.get(), aq.re.get(), qi.get(), MPFR_RNDN);
          // a_p <- c a_p - s q, a_q <- s a_p + c q
          mpfr_mul(xr.get(), c.get(), ap.re.get(), MPFR_RNDN);
          mpfr_mul(tmp.get(), s.get(), qr.get(), MPFR_RNDN);
          mpfr_sub(xr.get(), xr.get(), tmp.get(), MPFR_RNDN);
          mpfr_mul(xi.get(), c.get(), ap.im.get(), MPFR_RNDN);
          mpfr_mul(tmp.get(), s.get(), qi.get(), MPFR_RNDN);
          mpfr_sub(xi.get(), xi.get(), tmp.get(), MPFR_RNDN);
          mpfr_mul(aq.re.get(), s.get(), ap.re.get(), MPFR_RNDN);
          mpfr_fma(aq.re.get(), c.get(), qr.get(), aq.re.get(), MPFR_RNDN);
          mpfr_mul(aq.im.get(), s.get(), ap.im.get(), MPFR_RNDN);
          mpfr_fma(aq.im.get(), c.get(), qi.get(), aq.im.get(), MPFR_RNDN);
          mpfr_swap(ap.re.get(), xr.get());
          mpfr_swap(ap.im.get(), xi.get());
        }
        col_norm(p, norms[p]);
        col_norm(q, norms[q]);
      }
    }
    if (!rotated) break;
  }
  std::vector<double> out(n);
  for (int p = 0; p < n; ++p) {
    col_norm(p, norms[p]);
    out[p] = norms[p].log_abs();
  }
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

}  // namespace rmtp::mp
