#pragma once

#include <array>
#include <cmath>
#include <complex>

namespace rmtp {

using Cx = std::complex<double>;

// Truncated Taylor series f(x+h) = c0 + c1 h + c2 h^2 + c3 h^3.
struct Jet {
  std::array<Cx, 4> c{};

  static Jet constant(Cx v) { return Jet{{v, 0.0, 0.0, 0.0}}; }
  static Jet variable(Cx v) { return Jet{{v, 1.0, 0.0, 0.0}}; }

  Cx val() const { return c[0]; }
  Cx d1() const { return c[1]; }
  Cx d2() const { return 2.0 * c[2]; }
  Cx d3() const { return 6.0 * c[3]; }
};

inline Jet operator+(Jet a, const Jet& b) {
  for (int k = 0; k < 4; ++k) a.c[k] += b.c[k];
  return a;
}
inline Jet operator-(Jet a, const Jet& b) {
  for (int k = 0; k < 4; ++k) a.c[k] -= b.c[k];
  return a;
}
inline Jet operator-(Jet a) {
  for (auto& x : a.c) x = -x;
  return a;
}
inline Jet operator+(Jet a, Cx s) {
  a.c[0] += s;
  return a;
}
inline Jet operator+(Cx s, Jet a) { return a + s; }
inline Jet operator-(Jet a, Cx s) {
  a.c[0] -= s;
  return a;
}
inline Jet operator-(Cx s, const Jet& a) { return -a + s; }
inline Jet operator*(Jet a, Cx s) {
  for (auto& x : a.c) x *= s;
  return a;
}
inline Jet operator*(Cx s, Jet a) { return a * s; }

inline Jet operator*(const Jet& a, const Jet& b) {
  Jet r;
  for (int k = 0; k < 4; ++k)
    for (int i = 0; i <= k; ++i) r.c[k] += a.c[i] * b.c[k - i];
  return r;
}

inline Jet inv(const Jet& a) {
  Jet r;
  r.c[0] = 1.0 / a.c[0];
  for (int k = 1; k < 4; ++k) {
    Cx s = 0.0;
    for (int i = 1; i <= k; ++i) s += a.c[i] * r.c[k - i];
    r.c[k] = -s * r.c[0];
  }
  return r;
}

inline Jet operator/(const Jet& a, const Jet& b) { return a * inv(b); }
inline Jet operator/(Cx s, const Jet& b) { return inv(b) * s; }
inline Jet operator/(const Jet& a, Cx s) { return a * (1.0 / s); }

inline Jet log(const Jet& a) {
  // (log a)' = a'/a
  Jet da{{a.c[1], 2.0 * a.c[2], 3.0 * a.c[3], 0.0}};
  Jet q = da * inv(a);
  return Jet{{std::log(a.c[0]), q.c[0], q.c[1] / 2.0, q.c[2] / 3.0}};
}

inline Jet exp(const Jet& a) {
  Jet r;
  r.c[0] = std::exp(a.c[0]);
  for (int k = 1; k < 4; ++k) {
    Cx s = 0.0;
    for (int j = 1; j <= k; ++j) s += double(j) * a.c[j] * r.c[k - j];
    r.c[k] = s / double(k);
  }
  return r;
}

inline Jet ipow(Jet a, int n) {
  if (n < 0) return inv(ipow(a, -n));
  Jet r = Jet::constant(1.0);
  while (n) {
    if (n & 1) r = r * a;
    a = a * a;
    n >>= 1;
  }
  return r;
}

// Jet of the inverse function g of f at y = f(x), given f'(x), f''(x), f'''(x).
inline Jet inverse_jet(Cx x, Cx f1, Cx f2, Cx f3) {
  Cx g1 = 1.0 / f1;
  Cx g2 = -f2 * g1 * g1 * g1;
  Cx g3 = (3.0 * f2 * f2 - f1 * f3) * std::pow(g1, 5);
  return Jet{{x, g1, g2 / 2.0, g3 / 6.0}};
}

}  // namespace rmtp
