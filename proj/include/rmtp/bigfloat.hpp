#pragma once

#include <mpfr.h>

#include <complex>
#include <vector>

namespace rmtp::mp {

// RAII wrapper over mpfr_t with round-to-nearest arithmetic.
class Real {
 public:
  explicit Real(mpfr_prec_t prec = 53) { mpfr_init2(v_, prec); mpfr_set_zero(v_, 1); }
  Real(double x, mpfr_prec_t prec) { mpfr_init2(v_, prec); mpfr_set_d(v_, x, MPFR_RNDN); }
  Real(const Real& o) { mpfr_init2(v_, mpfr_get_prec(o.v_)); mpfr_set(v_, o.v_, MPFR_RNDN); }
  Real(Real&& o) noexcept {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_swap(v_, o.v_);
  }
  Real& operator=(const Real& o) {
    if (this != &o) mpfr_set(v_, o.v_, MPFR_RNDN);
    return *this;
  }
  Real& operator=(Real&& o) noexcept {
    mpfr_swap(v_, o.v_);
    return *this;
  }
  Real& operator=(double x) {
    mpfr_set_d(v_, x, MPFR_RNDN);
    return *this;
  }
  ~Real() { mpfr_clear(v_); }

  mpfr_ptr get() { return v_; }
  mpfr_srcptr get() const { return v_; }
  mpfr_prec_t prec() const { return mpfr_get_prec(v_); }
  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
  // log of |x|, finite for values outside the double range.
  double log_abs() const;
  bool is_zero() const { return mpfr_zero_p(v_) != 0; }

 private:
  mpfr_t v_;
};

Real operator+(const Real& a, const Real& b);
Real operator-(const Real& a, const Real& b);
Real operator*(const Real& a, const Real& b);
Real operator/(const Real& a, const Real& b);
Real operator-(const Real& a);
Real sqrt(const Real& a);
Real exp(const Real& a);
Real cos(const Real& a);
Real sin(const Real& a);
Real abs(const Real& a);
bool operator<(const Real& a, const Real& b);

struct Complex {
  Real re, im;
  explicit Complex(mpfr_prec_t prec = 53) : re(prec), im(prec) {}
  Complex(std::complex<double> z, mpfr_prec_t prec) : re(z.real(), prec), im(z.imag(), prec) {}
  Complex(Real r, Real i) : re(std::move(r)), im(std::move(i)) {}
  mpfr_prec_t prec() const { return re.prec(); }
  std::complex<double> to_complex() const { return {re.to_double(), im.to_double()}; }
  Real norm() const { return re * re + im * im; }
};

Complex operator+(const Complex& a, const Complex& b);
Complex operator-(const Complex& a, const Complex& b);
Complex operator*(const Complex& a, const Complex& b);
Complex operator/(const Complex& a, const Complex& b);
Complex conj(const Complex& a);
// e^{x + iy}
Complex exp(const Complex& a);

// Ratio a/b of two big complex numbers returned in double (the ratio itself must fit).
std::complex<double> ratio_to_complex(const Complex& a, const Complex& b);

// Dense complex matrix, row-major.
struct Matrix {
  int rows = 0, cols = 0;
  std::vector<Complex> a;
  Matrix(int r, int c, mpfr_prec_t prec);
  Complex& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
  const Complex& operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }
  mpfr_prec_t prec() const { return a.front().prec(); }
};

// Determinant by LU with partial pivoting on the modulus.
Complex determinant(Matrix m);

// C = Y * B with Y given in double; C is reset to precision prec.
void left_multiply(const std::vector<std::complex<double>>& y, int n, const Matrix& b, Matrix& c, mpfr_prec_t prec);

// Squared singular values, descending, by one-sided Jacobi on the columns; sweeps until every
// normalized column inner product is below 2^{-(prec - 16)}. Returned as logs.
std::vector<double> jacobi_log_sv2(Matrix m, int max_sweeps = 60);

}  // namespace rmtp::mp
