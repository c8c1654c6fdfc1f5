#include "rmtp/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rmtp/errors.hpp"
#include "rmtp/simd.hpp"

namespace rmtp {

namespace {

constexpr double kPi = 3.14159265358979323846;

Cx cpow_int(Cx x, int n) {
  if (n < 0) return 1.0 / cpow_int(x, -n);
  Cx r = 1.0;
  while (n) {
    if (n & 1) r *= x;
    x *= x;
    n >>= 1;
  }
  return r;
}

bool closed_form(const SpectralMeasure& mu) {
  switch (mu.kind()) {
    case SpectralMeasure::Kind::Atomic:
      return false;
    case SpectralMeasure::Kind::FreePower:
      return closed_form(mu.base());
    default:
      return true;
  }
}

// Jet of S(w) in w for measures with closed-form S.
Jet s_jet_closed(const SpectralMeasure& mu, const Jet& w) {
  switch (mu.kind()) {
    case SpectralMeasure::Kind::PointMass:
      return Jet::constant(std::exp(-mu.x0()));
    case SpectralMeasure::Kind::GinibreLimit:
    case SpectralMeasure::Kind::JacobiLimit: {
      double n0, n1, d0;
      mu.rational_s(n0, n1, d0);
      return (w * Cx(n1) + Cx(n0)) / (w + Cx(d0));
    }
    case SpectralMeasure::Kind::FreePower:
      return ipow(s_jet_closed(mu.base(), w), mu.power());
    default:
      throw Unsupported("closed-form S requested for an atomic measure");
  }
}

// M for the rational-S families, choosing the Herglotz root of
// (z - n1) w^2 + (z (1 + d0) - n0) w + z d0 = 0.
Cx named_m(double n0, double n1, double d0, Cx z) {
  auto roots = [&](Cx zz, Cx& r1, Cx& r2) -> int {
    Cx A = zz - n1, B = zz * (1.0 + d0) - n0, C = zz * d0;
    if (std::abs(A) < 1e-300) {
      r1 = -C / B;
      return 1;
    }
    Cx disc = std::sqrt(B * B - 4.0 * A * C);
    if (std::real(std::conj(B) * disc) < 0) disc = -disc;
    Cx q = -0.5 * (B + disc);
    r1 = q / A;
    r2 = (q == 0.0) ? Cx(0.0) : C / q;
    return 2;
  };
  auto pick_upper = [&](Cx zz) {
    Cx r1, r2;
    if (roots(zz, r1, r2) == 1) return r1;
    bool p1 = r1.imag() > 0, p2 = r2.imag() > 0;
    if (p1 && p2) return std::abs(r1) < std::abs(r2) ? r1 : r2;
    if (p1) return r1;
    if (p2) return r2;
    return r1.imag() > r2.imag() ? r1 : r2;
  };
  if (z == 0.0) return 0.0;
  bool lower = z.imag() < 0;
  Cx zu = lower ? std::conj(z) : z;
  Cx w;
  if (zu.imag() > 1e-12 * (1.0 + std::abs(zu))) {
    w = pick_upper(zu);
  } else {
    double x = zu.real();
    double A = x - n1, B = x * (1.0 + d0) - n0, C = x * d0;
    double disc = B * B - 4.0 * A * C;
    if (disc < 0 && std::abs(A) > 1e-300) {
      Cx r1, r2;
      roots(Cx(x, 0.0), r1, r2);
      w = r1.imag() > 0 ? r1 : r2;
    } else {
      Cx guide = pick_upper(Cx(x, 1e-7 * (1.0 + std::abs(x))));
      Cx r1, r2;
      int nr = roots(Cx(x, 0.0), r1, r2);
      Cx best = r1;
      if (nr == 2 && std::abs(r2 - guide) < std::abs(r1 - guide)) best = r2;
      w = Cx(best.real(), 0.0);
    }
  }
  return lower ? std::conj(w) : w;
}

MDerivs atomic_derivs(const SpectralMeasure& mu, Cx z) {
  double gap;
  simd::MSums s = simd::atomic_m_sums(mu.exp_points().data(), mu.weights().data(),
                                      mu.exp_points().size(), z, &gap);
  if (gap < 1e-28) throw PoleHit("z hits 1/e^s of an atom");
  return {s.m, s.d1, s.d2, s.d3};
}

MDerivs point_mass_derivs(double x0, Cx z) {
  double e = std::exp(x0);
  Cx d = 1.0 - e * z;
  if (std::abs(d) < 1e-14) throw PoleHit("z hits e^{-x0}");
  Cx inv = 1.0 / d;
  return {inv - 1.0, e * inv * inv, 2.0 * e * e * inv * inv * inv, 6.0 * e * e * e * std::pow(inv, 4)};
}

// z-jet in u of M^{-1}(u - 1) for closed-form measures.
Jet zjet_closed(const SpectralMeasure& mu, Cx u) {
  Jet U = Jet::variable(u);
  Jet W = U - Cx(1.0);
  return W / U * s_jet_closed(mu, W);
}

// Safeguarded Newton for the real inverse: M(z) = target on z < 0.
double real_inverse(const SpectralMeasure& mu, double target) {
  auto M = [&](double z, double& d) {
    MDerivs m = m_derivs(mu, Cx(z, 0.0));
    d = m.d1.real();
    return m.m.real();
  };
  double hi = 0.0, lo = -1.0, d;
  int guard = 0;
  while (M(lo, d) > target) {
    hi = lo;
    lo *= 2.0;
    if (++guard > 2000) throw NoConvergence("no bracket for the real inverse of M");
  }
  double z = 0.5 * (lo + hi);
  for (int it = 0; it < 300; ++it) {
    double f = M(z, d) - target;
    if (f == 0.0) return z;
    if (f > 0) hi = z;
    else lo = z;
    double zn = z - f / d;
    if (!(zn > lo && zn < hi)) zn = 0.5 * (lo + hi);
    if (std::abs(zn - z) <= 1e-16 * std::abs(z) || hi - lo <= 1e-16 * std::abs(lo)) return zn;
    z = zn;
  }
  return z;
}

double exp_moment_atoms(const SpectralMeasure& mu, int k) {
  double s = 0.0;
  for (std::size_t i = 0; i < mu.points().size(); ++i) s += mu.weights()[i] * std::exp(k * mu.points()[i]);
  return s;
}

}  // namespace

// ---------------------------------------------------------------- construction

SpectralMeasure SpectralMeasure::atomic(std::vector<double> points, std::vector<double> weights,
                                        std::optional<std::pair<double, double>> interval) {
  if (points.empty() || points.size() != weights.size())
    throw DomainError("atomic measure needs matching, non-empty points and weights");
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw DomainError("atomic weights must be positive");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw DomainError("atomic weights must sum to 1");
  for (double p : points)
    if (!std::isfinite(p)) throw DomainError("atomic points must be finite");
  auto [mn, mx] = std::minmax_element(points.begin(), points.end());
  std::pair<double, double> iv = interval.value_or(std::make_pair(*mn, *mx));
  if (*mn < iv.first || *mx > iv.second) throw DomainError("atoms outside the declared interval");
  SpectralMeasure m;
  m.kind_ = Kind::Atomic;
  m.points_ = std::move(points);
  m.weights_ = std::move(weights);
  m.exp_points_.resize(m.points_.size());
  for (std::size_t i = 0; i < m.points_.size(); ++i) m.exp_points_[i] = std::exp(m.points_[i]);
  m.interval_ = iv;
  return m;
}

SpectralMeasure SpectralMeasure::uniform_atoms(std::vector<double> points) {
  std::vector<double> w(points.size(), 1.0 / static_cast<double>(points.size()));
  return atomic(std::move(points), std::move(w));
}

SpectralMeasure SpectralMeasure::point_mass(double x0) {
  if (!std::isfinite(x0)) throw DomainError("point mass location must be finite");
  SpectralMeasure m;
  m.kind_ = Kind::PointMass;
  m.a_ = x0;
  m.interval_ = {x0, x0};
  return m;
}

SpectralMeasure SpectralMeasure::ginibre(double gamma) {
  if (!(gamma > 1.0)) throw DomainError("Ginibre limit needs gamma > 1");
  SpectralMeasure m;
  m.kind_ = Kind::GinibreLimit;
  m.a_ = gamma;
  return m;
}

SpectralMeasure SpectralMeasure::jacobi(double alpha_hat, double R_hat) {
  if (!(alpha_hat > 0.0) || !(R_hat >= 1.0)) throw DomainError("Jacobi limit needs alpha_hat > 0, R_hat >= 1");
  SpectralMeasure m;
  m.kind_ = Kind::JacobiLimit;
  m.a_ = alpha_hat;
  m.b_ = R_hat;
  return m;
}

SpectralMeasure SpectralMeasure::free_power(const SpectralMeasure& base, int power) {
  if (base.kind() == Kind::FreePower) throw DomainError("free powers cannot be nested");
  if (power < 1) throw DomainError("free power must be a positive integer");
  SpectralMeasure m;
  m.kind_ = Kind::FreePower;
  m.base_ = std::make_shared<const SpectralMeasure>(base);
  m.power_ = power;
  return m;
}

bool SpectralMeasure::is_degenerate() const {
  if (kind_ == Kind::PointMass) return true;
  if (kind_ == Kind::Atomic) {
    return std::all_of(points_.begin(), points_.end(), [&](double p) { return p == points_[0]; });
  }
  if (kind_ == Kind::FreePower) return base_->is_degenerate();
  return false;
}

void SpectralMeasure::rational_s(double& n0, double& n1, double& d0) const {
  if (kind_ == Kind::GinibreLimit) {
    n0 = 1.0;
    n1 = 0.0;
    d0 = a_;
  } else if (kind_ == Kind::JacobiLimit) {
    n0 = a_ + b_ + 1.0;
    n1 = 1.0;
    d0 = a_ + 1.0;
  } else {
    throw Unsupported("rational S is defined for named families only");
  }
}

// ---------------------------------------------------------------- transforms

double exp_moment(const SpectralMeasure& mu, int k) {
  if (k != 1 && k != -1) throw DomainError("exp_moment supports k = +-1");
  switch (mu.kind()) {
    case SpectralMeasure::Kind::Atomic:
      return exp_moment_atoms(mu, k);
    case SpectralMeasure::Kind::PointMass:
      return std::exp(k * mu.x0());
    default:
      // S(0) = 1/int e^s and S(-1) = int e^{-s}
      return k == 1 ? 1.0 / s_transform_real(mu, 0.0) : s_transform_real(mu, -1.0);
  }
}

ComplexPoint m_transform(const SpectralMeasure& mu, ComplexPoint z) {
  return m_derivs(mu, z).m;
}

MDerivs m_derivs(const SpectralMeasure& mu, ComplexPoint z) {
  switch (mu.kind()) {
    case SpectralMeasure::Kind::Atomic:
      return atomic_derivs(mu, z);
    case SpectralMeasure::Kind::PointMass:
      return point_mass_derivs(mu.x0(), z);
    case SpectralMeasure::Kind::GinibreLimit:
    case SpectralMeasure::Kind::JacobiLimit: {
      double n0, n1, d0;
      mu.rational_s(n0, n1, d0);
      Cx w = named_m(n0, n1, d0, z);
      if (z == 0.0) {
        // M'(0) = int e^s = 1/S(0)
        Jet g = zjet_closed(mu, Cx(1.0) + w);
        Jet m = inverse_jet(w, g.d1(), g.d2(), g.d3());
        return {0.0, m.d1(), m.d2(), m.d3()};
      }
      Jet g = zjet_closed(mu, Cx(1.0) + w);
      Jet m = inverse_jet(w, g.d1(), g.d2(), g.d3());
      return {w, m.d1(), m.d2(), m.d3()};
    }
    case SpectralMeasure::Kind::FreePower:
      if (mu.power() == 1) return m_derivs(mu.base(), z);
      throw Unsupported("M of a free power is only defined implicitly; use m_inverse");
  }
  throw Unsupported("unknown measure kind");
}

// ---------------------------------------------------------------- continuation

InverseBranch::InverseBranch(const SpectralMeasure& mu, std::optional<BranchSeed> seed) : mu_(&mu) {
  if (mu.kind() == SpectralMeasure::Kind::FreePower && !closed_form(mu))
    base_ = std::make_unique<InverseBranch>(mu.base(), seed);
  if (seed && mu.kind() == SpectralMeasure::Kind::Atomic) {
    u_ = seed->anchor_u;
    z_ = seed->anchor_value;
    started_ = true;
  }
}

namespace {

// Continue z = M^{-1}(u - 1) from (u0, z0) to u1 along the straight segment.
Cx continue_segment(const SpectralMeasure& mu, Cx u0, Cx z0, Cx u1) {
  Cx z = z0;
  double s = 0.0, ds = 1.0;
  Cx ucur = u0;
  MDerivs cur = m_derivs(mu, z);
  while (s < 1.0) {
    ds = std::min(ds, 1.0 - s);
    Cx unext = u0 + (s + ds) * (u1 - u0);
    Cx target = unext - 1.0;
    Cx zp = z + (unext - ucur) / cur.d1;
    Cx zn = zp;
    bool ok = false;
    MDerivs d{};
    try {
      for (int it = 0; it < 30; ++it) {
        d = m_derivs(mu, zn);
        Cx f = d.m - target;
        Cx step = f / d.d1;
        zn -= step;
        if (std::abs(step) <= 1e-15 * std::abs(zn) || std::abs(f) < 1e-15) {
          d = m_derivs(mu, zn);
          ok = std::abs(d.m - target) < 1e-12 * std::max(1.0, std::abs(target));
          break;
        }
      }
    } catch (const PoleHit&) {
      ok = false;
    }
    double pred = std::abs(zp - z);
    if (ok && std::abs(zn - zp) <= 0.3 * pred + 1e-10 * (1.0 + std::abs(zn))) {
      z = zn;
      cur = d;
      ucur = unext;
      s += ds;
      ds *= 2.0;
    } else {
      ds *= 0.5;
      if (ds < 1e-10) throw NoConvergence("Newton continuation of M^{-1} stalled");
    }
  }
  return z;
}

}  // namespace

Jet InverseBranch::at(ComplexPoint u) {
  const SpectralMeasure& mu = *mu_;
  if (closed_form(mu)) return zjet_closed(mu, u);
  if (mu.kind() == SpectralMeasure::Kind::FreePower) {
    Jet jb = base_->at(u);
    Jet W = Jet::variable(u) - Cx(1.0);
    int M = mu.power();
    return ipow(W / (W + Cx(1.0)), 1 - M) * ipow(jb, M);
  }
  if (!started_) {
    u_ = 0.5;
    z_ = m_inverse_real(mu, 0.5);
    started_ = true;
    // detour around the pole at u = 0
    Cx d = u - u_;
    double len = std::abs(d);
    if (len > 0) {
      double t = std::clamp(std::real(std::conj(d) * (Cx(0.0) - u_)) / (len * len), 0.0, 1.0);
      if (std::abs(u_ + t * d) < 0.25) {
        Cx via(0.5, u.imag() < 0 ? -0.3 : 0.3);
        z_ = continue_segment(mu, u_, z_, via);
        u_ = via;
      }
    }
  }
  z_ = continue_segment(mu, u_, z_, u);
  u_ = u;
  MDerivs d = m_derivs(mu, z_);
  return inverse_jet(z_, d.d1, d.d2, d.d3);
}

ComplexPoint m_inverse(const SpectralMeasure& mu, ComplexPoint u, std::optional<BranchSeed> seed) {
  if (u == 0.0) throw PoleHit("M^{-1}(u - 1) has its pole at u = 0");
  if (closed_form(mu)) return zjet_closed(mu, u).val();
  if (!seed && u.imag() == 0.0 && u.real() > 0.0 && u.real() < 1.0) {
    if (mu.kind() == SpectralMeasure::Kind::Atomic) return m_inverse_real(mu, u.real());
  }
  InverseBranch b(mu, seed);
  return b.at(u).val();
}

double m_inverse_real(const SpectralMeasure& mu, double u) {
  if (!(u > 0.0 && u <= 1.0)) throw DomainError("real branch needs u in (0, 1]");
  if (u == 1.0) return 0.0;
  if (closed_form(mu)) return zjet_closed(mu, u).val().real();
  if (mu.kind() == SpectralMeasure::Kind::FreePower) {
    int M = mu.power();
    double zb = m_inverse_real(mu.base(), u);
    return std::pow((u - 1.0) / u, 1 - M) * std::pow(zb, M);
  }
  return real_inverse(mu, u - 1.0);
}

std::vector<Jet> m_inverse_contour(const SpectralMeasure& mu, const std::vector<ComplexPoint>& nodes) {
  std::vector<Jet> out(nodes.size());
  if (nodes.empty()) return out;
  if (closed_form(mu)) {
    for (std::size_t j = 0; j < nodes.size(); ++j) out[j] = zjet_closed(mu, nodes[j]);
    return out;
  }
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& n : nodes) top = std::max(top, n.imag());
  std::size_t j0 = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    double d = std::abs(nodes[j] - Cx(0.5, top));
    if (d < best) {
      best = d;
      j0 = j;
    }
  }
  InverseBranch br(mu);
  std::size_t n = nodes.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t j = (j0 + k) % n;
    out[j] = br.at(nodes[j]);
  }
  Cx closing = br.at(nodes[j0]).val();
  if (std::abs(closing - out[j0].val()) > 1e-8 * (1.0 + std::abs(closing)))
    throw BranchAmbiguity("continuation of M^{-1} around the contour does not close");
  return out;
}

// ---------------------------------------------------------------- S transform

namespace {

Cx s_atomic(const SpectralMeasure& mu, Cx w, std::optional<BranchSeed> seed, bool real_only) {
  if (std::abs(w) < 1e-6) {
    double m1 = exp_moment_atoms(mu, 1);
    double m2 = 0.0;
    for (std::size_t i = 0; i < mu.points().size(); ++i) m2 += mu.weights()[i] * std::exp(2 * mu.points()[i]);
    return (1.0 + w) * (1.0 / m1 - m2 * w / (m1 * m1 * m1));
  }
  Cx v = 1.0 + w;
  if (std::abs(v) < 1e-6) {
    double a = exp_moment_atoms(mu, -1);
    double b = 0.0;
    for (std::size_t i = 0; i < mu.points().size(); ++i) b += mu.weights()[i] * std::exp(-2 * mu.points()[i]);
    return (a - b * v / a) / (1.0 - v);
  }
  Cx u = v;
  Cx z = real_only ? Cx(m_inverse_real(mu, u.real()), 0.0) : m_inverse(mu, u, seed);
  return u / (u - 1.0) * z;
}

}  // namespace

ComplexPoint s_transform(const SpectralMeasure& mu, ComplexPoint w, std::optional<BranchSeed> seed) {
  if (closed_form(mu)) return s_jet_closed(mu, Jet::constant(w)).val();
  if (mu.kind() == SpectralMeasure::Kind::FreePower)
    return cpow_int(s_transform(mu.base(), w, seed), mu.power());
  bool real = w.imag() == 0.0 && w.real() >= -1.0 && w.real() <= 0.0 && !seed;
  return s_atomic(mu, w, seed, real);
}

double s_transform_real(const SpectralMeasure& mu, double w) {
  if (w < -1.0 || w > 0.0) throw DomainError("real S needs w in [-1, 0]");
  if (closed_form(mu)) return s_jet_closed(mu, Jet::constant(w)).val().real();
  if (mu.kind() == SpectralMeasure::Kind::FreePower)
    return std::pow(s_transform_real(mu.base(), w), mu.power());
  return s_atomic(mu, w, std::nullopt, true).real();
}

Jet s_jet_real(const SpectralMeasure& mu, double w) {
  if (closed_form(mu)) return s_jet_closed(mu, Jet::variable(w));
  if (mu.kind() == SpectralMeasure::Kind::FreePower) return ipow(s_jet_real(mu.base(), w), mu.power());
  double u = 1.0 + w;
  if (u <= 1e-9 || u >= 1.0 - 1e-9) throw DomainError("S jet for atomic measures needs w inside (-1, 0)");
  double z = m_inverse_real(mu, u);
  MDerivs d = m_derivs(mu, Cx(z, 0.0));
  Jet Z = inverse_jet(z, d.d1, d.d2, d.d3);
  Jet U = Jet::variable(u);
  return U / (U - Cx(1.0)) * Z;
}

ComplexPoint psi_tilde(const SpectralMeasure& mu, ComplexPoint c, std::optional<BranchSeed> seed) {
  if (mu.kind() != SpectralMeasure::Kind::Atomic && mu.kind() != SpectralMeasure::Kind::PointMass)
    throw Unsupported("psi_tilde is defined for atomic measures");
  SpectralMeasure a = mu.kind() == SpectralMeasure::Kind::PointMass
                          ? SpectralMeasure::atomic({mu.x0()}, {1.0})
                          : mu;
  Cx S = s_transform(a, c - 1.0, seed);
  Cx acc = c * std::log(S);
  for (std::size_t i = 0; i < a.points().size(); ++i)
    acc += a.weights()[i] * std::log(c / S + (1.0 - c) * a.exp_points()[i]);
  return acc;
}

// ---------------------------------------------------------------- boundary values

namespace {

// Value and derivative of the map whose level set F(v) = x e^{i theta} is continued.
struct ArcPoint {
  Cx v, F, dF;
};

// Continue the root of F(v) = x e^{i theta} from theta = pi, where v0 is the real root,
// down to theta = 0 through the upper half plane.
template <class Eval>
ArcPoint arc_continue(Eval eval, double x, Cx v0) {
  auto newton = [&](Cx target, Cx& v, ArcPoint& out) {
    try {
      for (int it = 0; it < 40; ++it) {
        ArcPoint e = eval(v);
        Cx f = e.F - target;
        Cx step = f / e.dF;
        v -= step;
        if (std::abs(step) <= 1e-15 * std::abs(v) || std::abs(f) <= 1e-16 * std::abs(target)) {
          out = eval(v);
          return std::abs(out.F - target) <= 1e-11 * std::abs(target);
        }
      }
      // near a fold the root is only attainable to about sqrt(eps)
      out = eval(v);
      return std::abs(out.F - target) <= 1e-11 * std::abs(target);
    } catch (const PoleHit&) {
    }
    return false;
  };
  ArcPoint cur;
  Cx v = v0;
  if (!newton(Cx(-x, 0.0), v, cur)) cur = eval(v0);
  double th = kPi, dth = kPi / 64.0;
  while (th > 0.0) {
    dth = std::min(dth, th);
    double thn = th - dth;
    Cx target = x * std::polar(1.0, thn);
    Cx vp = cur.v + (target - cur.F) / cur.dF;
    Cx v2 = vp;
    ArcPoint nxt;
    bool ok = newton(target, v2, nxt);
    double pred = std::abs(vp - cur.v);
    if (ok && std::abs(v2 - vp) <= 0.3 * pred + 1e-10 * (1.0 + std::abs(v2))) {
      cur = nxt;
      th = thn;
      dth *= 1.5;
    } else {
      dth *= 0.5;
      if (dth < 1e-12) throw NoConvergence("arc continuation of the boundary value stalled");
    }
  }
  if (std::abs(cur.v.imag()) < 1e-12 * std::abs(cur.v)) cur = eval(Cx(cur.v.real(), 0.0));
  return cur;
}

// Bisection for the real root of a function increasing from -inf to 0 on (lo, hi).
template <class F>
double bisect_increasing(F f, double lo, double hi, double target) {
  for (int it = 0; it < 200 && hi - lo > 1e-16 * std::max(1.0, std::abs(lo)); ++it) {
    double mid = 0.5 * (lo + hi);
    if (f(mid) > target) hi = mid;
    else lo = mid;
  }
  return 0.5 * (lo + hi);
}

// Free power of an atomic base: unknown omega, F(omega) = eta_b(omega)^{1-M} omega^M.
BoundaryValue boundary_atomic_power(const SpectralMeasure& base, int M, double x) {
  auto eval = [&](Cx om) {
    MDerivs mb = m_derivs(base, om);
    Cx w = mb.m;
    Cx eta = w / (1.0 + w);
    Cx etap = mb.d1 / ((1.0 + w) * (1.0 + w));
    ArcPoint r;
    r.v = om;
    r.F = cpow_int(eta, 1 - M) * cpow_int(om, M);
    r.dF = r.F * ((1.0 - M) * etap / eta + double(M) / om);
    return r;
  };
  auto Freal = [&](double om) { return eval(Cx(om, 0.0)).F.real(); };
  double hi = -1e-300, lo = -1.0;
  int guard = 0;
  while (Freal(lo) > -x) {
    hi = lo;
    lo *= 2.0;
    if (++guard > 2000) throw NoConvergence("no bracket for the subordination root");
  }
  ArcPoint p = arc_continue(eval, x, Cx(bisect_increasing(Freal, lo, hi, -x), 0.0));
  MDerivs mb = m_derivs(base, p.v);
  BoundaryValue b;
  b.omega = p.v;
  b.w = mb.m;
  b.mb_prime = mb.d1;
  b.domega_dt = -x / p.dF;
  b.dw_dt = mb.d1 * b.domega_dt;
  return b;
}

// Free power of a closed-form base: unknown w, F(w) = (w/(1+w)) S_b(w)^M.
BoundaryValue boundary_closed_power(const SpectralMeasure& base, int M, double x) {
  auto eval = [&](Cx w) {
    Jet W = Jet::variable(w);
    Jet g = W / (W + Cx(1.0)) * ipow(s_jet_closed(base, W), M);
    return ArcPoint{w, g.val(), g.d1()};
  };
  auto Freal = [&](double w) { return eval(Cx(w, 0.0)).F.real(); };
  ArcPoint p = arc_continue(eval, x, Cx(bisect_increasing(Freal, -1.0, 0.0, -x), 0.0));
  Jet W = Jet::variable(p.v);
  Jet om = W / (W + Cx(1.0)) * s_jet_closed(base, W);
  BoundaryValue b;
  b.w = p.v;
  b.omega = om.val();
  b.dw_dt = -x / p.dF;
  b.domega_dt = om.d1() * b.dw_dt;
  b.mb_prime = 1.0 / om.d1();
  if (std::abs(b.omega.imag()) < 1e-12 * std::abs(b.omega)) b.omega = b.omega.real();
  return b;
}

}  // namespace

BoundaryValue boundary_value(const SpectralMeasure& mu, double t) {
  double x = std::exp(-t);
  BoundaryValue b;
  switch (mu.kind()) {
    case SpectralMeasure::Kind::FreePower:
      if (mu.power() > 1) {
        if (closed_form(mu.base())) return boundary_closed_power(mu.base(), mu.power(), x);
        return boundary_atomic_power(mu.base(), mu.power(), x);
      }
      return boundary_value(mu.base(), t);
    default: {
      MDerivs d = m_derivs(mu, Cx(x, 0.0));
      b.w = d.m;
      b.omega = x;
      b.mb_prime = d.d1;
      b.domega_dt = -x;
      b.dw_dt = -x * d.d1;
      return b;
    }
  }
}

double density_from_boundary(const SpectralMeasure& mu, double t) {
  if (mu.kind() == SpectralMeasure::Kind::Atomic || mu.kind() == SpectralMeasure::Kind::PointMass)
    throw Unsupported("density_from_boundary needs a free power or a named family");
  if (mu.kind() == SpectralMeasure::Kind::FreePower && mu.power() == 1 && !mu.base().is_named()) return 0.0;
  BoundaryValue b = boundary_value(mu, t);
  return std::max(0.0, b.w.imag() / kPi);
}

double pv_m_on_support(const SpectralMeasure& mu, double t) {
  return boundary_value(mu, t).w.real();
}

ComplexPoint subordination_boundary(const SpectralMeasure& mu_i, const SpectralMeasure& mu_prod,
                                    double t, int sign) {
  if (sign != 1 && sign != -1) throw DomainError("sign must be +1 or -1");
  Cx om;
  if (mu_prod.kind() == SpectralMeasure::Kind::FreePower) {
    (void)mu_i;
    om = boundary_value(mu_prod, t).omega;
  } else {
    om = std::exp(-t);
  }
  return sign > 0 ? om : std::conj(om);
}

// ---------------------------------------------------------------- support and integration

std::pair<double, double> support(const SpectralMeasure& mu) {
  switch (mu.kind()) {
    case SpectralMeasure::Kind::Atomic: {
      auto [a, b] = std::minmax_element(mu.points().begin(), mu.points().end());
      return {*a, *b};
    }
    case SpectralMeasure::Kind::PointMass:
      return {mu.x0(), mu.x0()};
    case SpectralMeasure::Kind::GinibreLimit:
    case SpectralMeasure::Kind::JacobiLimit: {
      double n0, n1, d0;
      mu.rational_s(n0, n1, d0);
      // discriminant of the M quadratic vanishes at the reciprocal support edges
      double A = (1.0 - d0) * (1.0 - d0), B = 4.0 * n1 * d0 - 2.0 * n0 * (1.0 + d0), C = n0 * n0;
      double disc = std::sqrt(B * B - 4.0 * A * C);
      double q = -0.5 * (B + (B >= 0 ? disc : -disc));
      double z1 = q / A, z2 = C / q;
      if (z1 > z2) std::swap(z1, z2);
      return {-std::log(z2), -std::log(z1)};
    }
    case SpectralMeasure::Kind::FreePower: {
      if (mu.power() == 1) return support(mu.base());
      auto [lb, hb] = support(mu.base());
      double lo = mu.power() * lb, hi = mu.power() * hb;
      auto inside = [&](double t) {
        try {
          return boundary_value(mu, t).w.imag() > 1e-10;
        } catch (const Error&) {
          return false;
        }
      };
      const int G = 256;
      int first = -1, last = -1;
      for (int i = 0; i <= G; ++i) {
        double t = lo + (hi - lo) * i / G;
        if (inside(t)) {
          if (first < 0) first = i;
          last = i;
        }
      }
      if (first < 0) throw NoConvergence("free power support not found");
      auto refine = [&](double in, double out) {
        for (int it = 0; it < 60; ++it) {
          double mid = 0.5 * (in + out);
          if (inside(mid)) in = mid;
          else out = mid;
        }
        return 0.5 * (in + out);
      };
      double a = first == 0 ? lo : refine(lo + (hi - lo) * first / G, lo + (hi - lo) * (first - 1) / G);
      double b = last == G ? hi : refine(lo + (hi - lo) * last / G, lo + (hi - lo) * (last + 1) / G);
      return {a, b};
    }
  }
  throw Unsupported("unknown measure kind");
}

double integrate_density(const SpectralMeasure& mu, const std::function<double(double)>& f, int nodes) {
  auto [a, b] = support(mu);
  double acc = 0.0;
  for (int j = 0; j < nodes; ++j) {
    double th = (j + 0.5) * kPi / nodes;
    double t = a + (b - a) * 0.5 * (1.0 - std::cos(th));
    double jac = (b - a) * 0.5 * std::sin(th);
    acc += f(t) * density_from_boundary(mu, t) * jac;
  }
  return acc * kPi / nodes;
}

}  // namespace rmtp
