#include "rmtp/bessel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rmtp/bigfloat.hpp"
#include "rmtp/errors.hpp"
#include "rmtp/simd.hpp"

namespace rmtp {

namespace {

template <class T>
T det_lu(std::vector<T> m, int n) {
  T det = 1.0;
  for (int k = 0; k < n; ++k) {
    int piv = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(m[i * n + k]) > std::abs(m[piv * n + k])) piv = i;
    if (m[piv * n + k] == T(0.0)) return T(0.0);
    if (piv != k) {
      for (int j = 0; j < n; ++j) std::swap(m[k * n + j], m[piv * n + j]);
      det = -det;
    }
    det *= m[k * n + k];
    for (int i = k + 1; i < n; ++i) {
      T f = m[i * n + k] / m[k * n + k];
      for (int j = k + 1; j < n; ++j) m[i * n + j] -= f * m[k * n + j];
    }
  }
  return det;
}

std::vector<Cx> rho_tuple(int N) {
  std::vector<Cx> r(N);
  for (int i = 0; i < N; ++i) r[i] = static_cast<double>(N - 1 - i);
  return r;
}

// det(e^{mu_i lambda_j}) at the given precision.
mp::Complex exp_det(const std::vector<double>& lambda, const std::vector<Cx>& mu, mpfr_prec_t prec) {
  int n = static_cast<int>(lambda.size());
  mp::Matrix m(n, n, prec);
  for (int i = 0; i < n; ++i) {
    mp::Real re(mu[i].real(), prec), im(mu[i].imag(), prec);
    for (int j = 0; j < n; ++j) {
      mp::Real l(lambda[j], prec);
      m(i, j) = mp::exp(mp::Complex(re * l, im * l));
    }
  }
  return mp::determinant(std::move(m));
}

Cx det_ratio(const std::vector<double>& lambda, const std::vector<Cx>& mu, const std::vector<Cx>& rho,
             mpfr_prec_t prec) {
  mp::Complex num = exp_det(lambda, mu, prec), den = exp_det(lambda, rho, prec);
  if (den.re.is_zero() && den.im.is_zero()) throw IllConditioned("reference determinant vanished");
  return mp::ratio_to_complex(num, den);
}

void check_hook(int N, const HookIndex& h) {
  if (h.b < 0 || h.b >= N) throw DomainError("hook b must lie in {0, ..., N-1}");
}

std::vector<Cx> assemble_mu(int N, const std::vector<HookIndex>& hooks) {
  std::vector<Cx> mu = rho_tuple(N);
  std::vector<bool> used(N, false);
  for (const auto& h : hooks) {
    check_hook(N, h);
    int pos = N - 1 - h.b;
    if (used[pos]) throw DomainError("hook b values must be distinct");
    used[pos] = true;
    mu[pos] = h.a;
  }
  return mu;
}

}  // namespace

LogSpectrum::LogSpectrum(std::vector<double> values) : lambda(std::move(values)) {
  if (lambda.empty()) throw DomainError("log-spectrum must be non-empty");
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    if (!std::isfinite(lambda[i])) throw DomainError("log-spectrum entries must be finite");
    if (i > 0 && lambda[i] > lambda[i - 1]) throw DomainError("log-spectrum must be descending");
  }
}

Cx bessel_ratio_tuple(const std::vector<double>& lambda_in, const std::vector<Cx>& mu,
                      const BesselOptions& opt) {
  int N = static_cast<int>(lambda_in.size());
  if (static_cast<int>(mu.size()) != N) throw DomainError("mu and lambda lengths differ");
  if (N > opt.max_N) throw IllConditioned("N = " + std::to_string(N) + " exceeds the direct evaluator range");
  std::vector<Cx> rho = rho_tuple(N);
  // Delta(rho)/Delta(mu) as a product of factors near 1 to stay in range
  Cx vand = 1.0;
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j) {
      Cx d = mu[i] - mu[j];
      if (std::abs(d) < 1e-14) throw DomainError("mu entries must be pairwise distinct");
      vand *= (rho[i] - rho[j]) / d;
    }
  bool same = true;
  for (int i = 0; i < N; ++i) same = same && mu[i] == rho[i];
  if (same) return 1.0;
  double spread = 0.0;
  for (double l : lambda_in) spread = std::max(spread, std::abs(l));
  mpfr_prec_t prec = 128 + static_cast<mpfr_prec_t>(2.0 * N * N * (1.0 + spread));
  for (;;) {
    Cx r1 = det_ratio(lambda_in, mu, rho, prec);
    Cx r2 = det_ratio(lambda_in, mu, rho, prec + 64);
    double rel = std::abs(r1 - r2) / std::max(std::abs(r2), 1e-300);
    if (rel < 1e-15) return r2 * vand;
    if (2 * prec > opt.max_prec) {
      if (rel > 1e-6)
        throw IllConditioned("determinant ratio unstable (relative change " + std::to_string(rel) + ")");
      return r2 * vand;
    }
    prec *= 2;
  }
}

Cx bessel_ratio_direct(const LogSpectrum& ls, const std::vector<HookIndex>& hooks, bool* jittered,
                       const BesselOptions& opt) {
  int N = ls.N();
  std::vector<Cx> mu = assemble_mu(N, hooks);
  std::vector<double> lambda = ls.lambda;
  bool jit = false;
  for (int i = 0; i + 1 < N; ++i)
    if (lambda[i] - lambda[i + 1] < opt.tie_gap) jit = true;
  if (jit)
    for (int i = 0; i < N; ++i) lambda[i] -= 1e-9 * i;
  if (jittered) *jittered = jit;
  if (hooks.empty()) return 1.0;
  return bessel_ratio_tuple(lambda, mu, opt);
}

double hook_schur(int alpha, int beta, const std::vector<double>& x) {
  if (alpha < 0 || beta < 0) throw DomainError("hook arms must be non-negative");
  if (x.empty()) throw DomainError("hook_schur needs at least one variable");
  int deg = alpha + beta + 1;
  // complete and elementary symmetric polynomials, one variable at a time
  std::vector<double> h(deg + 1, 0.0), e(deg + 1, 0.0);
  h[0] = e[0] = 1.0;
  for (double xv : x) {
    for (int k = 1; k <= deg; ++k) h[k] += xv * h[k - 1];
    for (int k = deg; k >= 1; --k) e[k] += xv * e[k - 1];
  }
  double s = 0.0;
  for (int i = 0; i <= beta; ++i) s += (i % 2 ? -1.0 : 1.0) * h[alpha + 1 + i] * e[beta - i];
  return s;
}

double schur_from_hooks(const std::vector<std::pair<int, int>>& fr, const std::vector<double>& x) {
  int k = static_cast<int>(fr.size());
  if (k == 0) return 1.0;
  for (int i = 1; i < k; ++i)
    if (fr[i].first >= fr[i - 1].first || fr[i].second >= fr[i - 1].second)
      throw DomainError("Frobenius coordinates must be strictly decreasing");
  std::vector<double> m(k * k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) m[i * k + j] = hook_schur(fr[i].first, fr[j].second, x);
  return det_lu(std::move(m), k);
}

double schur_bialternant(const std::vector<int>& partition, const std::vector<double>& x) {
  int n = static_cast<int>(x.size());
  std::vector<int> lam(n, 0);
  for (int i = 0; i < n && i < static_cast<int>(partition.size()); ++i) lam[i] = partition[i];
  if (static_cast<int>(partition.size()) > n && partition[n] != 0) return 0.0;
  std::vector<double> a(n * n), v(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      a[i * n + j] = std::pow(x[i], lam[j] + n - 1 - j);
      v[i * n + j] = std::pow(x[i], n - 1 - j);
    }
  return det_lu(std::move(a), n) / det_lu(std::move(v), n);
}

Cx bessel_contour_prefactor(int N, const HookIndex& hook) {
  check_hook(N, hook);
  int b = hook.b;
  Cx den = 1.0;
  for (int j = 0; j < N; ++j) {
    Cx d = hook.a - static_cast<double>(j);
    if (std::abs(d) < 1e-3) throw PrefactorPole("a is within 1e-3 of the integer " + std::to_string(j));
    den *= d;
  }
  double fact = std::tgamma(N - b) * std::tgamma(b + 1.0);
  double sign = ((N - b) % 2 == 0) ? 1.0 : -1.0;
  return sign * fact * (hook.a - static_cast<double>(b)) / den;
}

QuadResult bessel_contour_integral(const LogSpectrum& ls, const HookIndex& hook, const QuadOptions& quad) {
  int N = ls.N();
  check_hook(N, hook);
  std::vector<double> x(N);
  for (int i = 0; i < N; ++i) x[i] = std::exp(ls.lambda[i]);
  double xmin = *std::min_element(x.begin(), x.end()), xmax = *std::max_element(x.begin(), x.end());
  // z-circle around the e^lambda, kept off the negative axis; w-circle around 0 and the z-circle
  double zc = 0.5 * (xmin + xmax), zr = 0.5 * (xmax - xmin) + 0.5 * xmin;
  double wr = 2.0 * (zc + zr);
  Curve zcurve = circle(zc, zr), wcurve = circle(0.0, wr);
  auto estimate = [&](int n) {
    Contour zs = discretize(zcurve, n), ws = discretize(wcurve, n);
    std::vector<Cx> A(n), B(n), row(n);
    for (int i = 0; i < n; ++i) {
      Cx z = zs.nodes[i], p = 1.0, q = 1.0;
      Cx w = ws.nodes[i];
      for (double xv : x) {
        p *= z - xv;
        q *= w - xv;
      }
      A[i] = std::exp(hook.a * std::log(z)) / p * zs.weights[i];
      B[i] = std::pow(w, -hook.b - 1) * q * ws.weights[i];
    }
    Cx total = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) row[j] = 1.0 / (zs.nodes[i] - ws.nodes[j]);
      total += A[i] * simd::weighted_sum(row.data(), B.data(), n);
    }
    return total;
  };
  return converge(estimate, quad);
}

Cx bessel_ratio_contour(const LogSpectrum& ls, const HookIndex& hook, const QuadOptions& quad) {
  Cx pre = bessel_contour_prefactor(ls.N(), hook);
  return pre * bessel_contour_integral(ls, hook, quad).value;
}

Cx bessel_ratio_multi(const LogSpectrum& ls, const std::vector<HookIndex>& hooks, SingleHookMethod method) {
  int N = ls.N();
  int k = static_cast<int>(hooks.size());
  if (k == 0) return 1.0;
  if (k > 4) throw DomainError("multi-hook determinant supports k <= 4");
  for (int i = 0; i < k; ++i) {
    check_hook(N, hooks[i]);
    if (i > 0 && hooks[i].b >= hooks[i - 1].b) throw DomainError("hook b values must be strictly decreasing");
    for (int j = 0; j < i; ++j)
      if (std::abs(hooks[i].a - hooks[j].a) < 1e-14) throw DomainError("hook a values must be distinct");
  }
  bool identity = true;
  for (const auto& h : hooks) identity = identity && h.a == Cx(h.b);
  if (identity) return bessel_ratio_direct(ls, hooks);

  auto single = [&](Cx a, int b) -> Cx {
    if (a == Cx(b)) return 1.0;
    if (method == SingleHookMethod::Direct) return bessel_ratio_direct(ls, {HookIndex{a, b}});
    return bessel_ratio_contour(ls, HookIndex{a, b});
  };
  Cx pre = 1.0;
  for (int m = 0; m < k; ++m)
    for (int l = 0; l < k; ++l)
      if (m != l) pre *= hooks[m].a - static_cast<double>(hooks[l].b);
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j)
      pre /= (hooks[i].a - hooks[j].a) * static_cast<double>(hooks[i].b - hooks[j].b);
  if (((k * (k - 1)) / 2) % 2) pre = -pre;
  std::vector<Cx> m(k * k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      Cx ai = hooks[i].a;
      Cx dij = ai - static_cast<double>(hooks[j].b);
      if (std::abs(dij) < 1e-14) throw DomainError("a_i equals b_j off the diagonal");
      m[i * k + j] = (ai - static_cast<double>(hooks[i].b)) / dij * single(ai, hooks[j].b);
    }
  return pre * det_lu(std::move(m), k);
}

Cx bessel_ratio_asymptotic(const SpectralMeasure& mu, const std::vector<std::pair<Cx, double>>& hooks) {
  if (mu.kind() != SpectralMeasure::Kind::Atomic) throw Unsupported("asymptotic ratio needs an atomic measure");
  int N = static_cast<int>(mu.points().size());
  int k = static_cast<int>(hooks.size());
  if (k == 0) return 1.0;
  std::vector<Cx> za(k), zb(k), a(k), b(k);
  Cx prod = 1.0;
  for (int i = 0; i < k; ++i) {
    a[i] = hooks[i].first;
    b[i] = hooks[i].second;
    double bn = hooks[i].second * N;
    if (std::abs(bn - std::round(bn)) > 1e-9 || std::round(bn) < 0 || std::round(bn) > N - 1)
      throw DomainError("b~ * N must be an integer in {0, ..., N-1}");
    if (std::round(bn) == 0) throw DomainError("b~ = 0 sits on the pole of M^{-1}(u - 1)");
    if (i > 0 && !(hooks[i].second < hooks[i - 1].second))
      throw DomainError("b~ values must be strictly decreasing");
    za[i] = m_inverse(mu, a[i]);
    zb[i] = m_inverse(mu, b[i]);
    Cx mpa = m_derivs(mu, za[i]).d1, mpb = m_derivs(mu, zb[i]).d1;
    Cx sa = s_transform(mu, a[i] - 1.0), sb = s_transform(mu, b[i] - 1.0);
    Cx expo = static_cast<double>(N) * (psi_tilde(mu, b[i]) - psi_tilde(mu, a[i]));
    prod *= (a[i] - b[i]) / (std::sqrt(mpa) * std::sqrt(mpb)) * std::sqrt(sb) / std::sqrt(sa) * std::exp(expo);
  }
  Cx pre = 1.0;
  for (int m = 0; m < k; ++m)
    for (int l = 0; l < k; ++l) {
      if (m != l) pre *= a[m] - b[l];
      pre /= za[m] - zb[l];
    }
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) pre *= (za[i] - za[j]) * (zb[i] - zb[j]) / ((a[i] - a[j]) * (b[i] - b[j]));
  return pre * prod;
}

namespace {

void check_mbgf(MbgfEnsemble e, const MbgfParams& p, std::size_t n) {
  if (p.N < 1) throw DomainError("MBGF needs N >= 1");
  if (static_cast<int>(n) != p.N) throw DomainError("s must have N entries");
  switch (e) {
    case MbgfEnsemble::Jacobi:
      if (!(p.alpha > 0.0) || p.R < p.N) throw DomainError("Jacobi MBGF needs alpha > 0 and R >= N");
      break;
    case MbgfEnsemble::Wishart:
      if (!(p.L >= p.N)) throw DomainError("Wishart MBGF needs L >= N");
      break;
    case MbgfEnsemble::FixedSpectrum:
      if (static_cast<int>(p.eigenvalues.size()) != p.N) throw DomainError("fixed spectrum needs N eigenvalues");
      for (double v : p.eigenvalues)
        if (!(v > 0.0)) throw DomainError("fixed spectrum eigenvalues must be positive");
      break;
  }
}

}  // namespace

double log_mbgf(MbgfEnsemble e, const MbgfParams& p, const std::vector<double>& s) {
  check_mbgf(e, p, s.size());
  int N = p.N;
  double acc = 0.0;
  switch (e) {
    case MbgfEnsemble::Jacobi:
      // prod_i (1 - i - alpha)_R / (-s_i - alpha)_R with falling factorials
      for (int i = 1; i <= N; ++i)
        for (int k = 0; k < p.R; ++k)
          acc += std::log(std::abs((1.0 - i - p.alpha - k) / (-s[i - 1] - p.alpha - k)));
      return acc;
    case MbgfEnsemble::Wishart:
      for (int i = 1; i <= N; ++i) {
        double rho_i = N - i;
        acc += std::lgamma(p.L - N + s[i - 1] + 1.0) - std::lgamma(p.L - i + 1.0) +
               (rho_i - s[i - 1]) * std::log(static_cast<double>(N));
      }
      return acc;
    case MbgfEnsemble::FixedSpectrum: {
      std::vector<double> lam(N);
      for (int i = 0; i < N; ++i) lam[i] = std::log(p.eigenvalues[i]);
      std::sort(lam.begin(), lam.end(), std::greater<>());
      for (int i = 0; i + 1 < N; ++i)
        if (lam[i] - lam[i + 1] < 1e-8) lam[i + 1] = lam[i] - 1e-9 * (i + 1);
      std::vector<Cx> mu(s.begin(), s.end());
      return std::log(std::abs(bessel_ratio_tuple(lam, mu)));
    }
  }
  return acc;
}

double mbgf(MbgfEnsemble e, const MbgfParams& p, const std::vector<double>& s) {
  bool at_rho = true;
  for (int i = 0; i < static_cast<int>(s.size()); ++i) at_rho = at_rho && s[i] == p.N - 1.0 - i;
  if (at_rho) {
    check_mbgf(e, p, s.size());
    return 1.0;
  }
  return std::exp(log_mbgf(e, p, s));
}

double moment_via_mbgf(MbgfEnsemble e, const MbgfParams& p, int k) {
  if (k != 1 && k != 2) throw DomainError("moment_via_mbgf supports k = 1, 2");
  if (p.N > 6) throw DomainError("moment_via_mbgf needs N <= 6");
  int N = p.N;
  std::vector<double> rho(N);
  for (int i = 0; i < N; ++i) rho[i] = N - 1.0 - i;
  check_mbgf(e, p, rho.size());
  // g = log phi with g(rho) = 0: central differences for g_i and g_ii
  auto derivs = [&](double h, std::vector<double>& g1, std::vector<double>& g2) {
    g1.assign(N, 0.0);
    g2.assign(N, 0.0);
    for (int i = 0; i < N; ++i) {
      std::vector<double> sp = rho, sm = rho;
      sp[i] += h;
      sm[i] -= h;
      double fp = log_mbgf(e, p, sp), fm = log_mbgf(e, p, sm);
      g1[i] = (fp - fm) / (2.0 * h);
      g2[i] = (fp + fm) / (h * h);
    }
  };
  auto moment = [&](const std::vector<double>& g1, const std::vector<double>& g2) {
    double m = 0.0;
    for (int i = 0; i < N; ++i) {
      if (k == 1) {
        m += g1[i];
      } else {
        double c = 0.0;
        for (int a = 0; a < N; ++a)
          if (a != i) c += 1.0 / (rho[i] - rho[a]);
        m += g2[i] + g1[i] * g1[i] + 2.0 * g1[i] * c;
      }
    }
    return m;
  };
  const double h = 1e-3;
  double est[3];
  for (int j = 0; j < 3; ++j) {
    std::vector<double> g1, g2;
    derivs(h / std::pow(2.0, j), g1, g2);
    est[j] = moment(g1, g2);
  }
  double r1 = (4.0 * est[1] - est[0]) / 3.0, r2 = (4.0 * est[2] - est[1]) / 3.0;
  if (std::abs(r1 - r2) > 1e-4 * std::max(1.0, std::abs(r1)))
    throw StepSizeFailure("Richardson estimates disagree: " + std::to_string(r1) + " vs " + std::to_string(r2));
  return r1;
}

}  // namespace rmtp
