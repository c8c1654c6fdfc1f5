#include "rmtp/predict.hpp"

#include <algorithm>
#include <cmath>

#include "rmtp/errors.hpp"
#include "rmtp/simd.hpp"

namespace rmtp {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool has_lambda(const SpectralMeasure& mu) {
  return !(mu.is_named() || mu.kind() == SpectralMeasure::Kind::PointMass);
}

// Jet in u of z(u) = M^{-1}(u - 1) on the real segment, valid for every measure kind.
Jet z_jet_real(const SpectralMeasure& mu, double u) {
  Jet U = Jet::variable(u);
  return (U - Cx(1.0)) / U * s_jet_real(mu, u - 1.0);
}

// Fixed-spectrum Lambda from z-jets at u and w.
Cx lambda_pair(Cx u, const Jet& zu, Cx w, const Jet& zw) {
  Cx d = zu.val() - zw.val();
  Cx h = u - w;
  return zu.d1() * zw.d1() / (d * d) - 1.0 / (h * h);
}

// Diagonal value: Schwarzian(z)/6 = c3/c1 - (c2/c1)^2 in Taylor coefficients.
Cx lambda_diag(const Jet& z) {
  Cx r = z.c[2] / z.c[1];
  return z.c[3] / z.c[1] - r * r;
}

// Unwrap logs along a closed node sequence, starting where the principal branch is right.
void unwrap_closed(std::vector<Cx>& logs, std::size_t start) {
  std::size_t n = logs.size();
  Cx prev = logs[start];
  for (std::size_t k = 1; k <= n; ++k) {
    std::size_t j = (start + k) % n;
    Cx v = logs[j];
    double jump = v.imag() - prev.imag();
    double turns = std::round(jump / (2.0 * kPi));
    if (k == n) {
      if (turns != 0.0) throw BranchAmbiguity("log S winds around the origin along the contour");
      break;
    }
    v -= Cx(0.0, 2.0 * kPi * turns);
    logs[j] = v;
    prev = v;
  }
}

// Per-node data on one contour.
struct NodeData {
  std::vector<Cx> u, wt, xi, psi, dpsi;
  // z-jets per group with nonzero Lambda
  std::vector<std::vector<Jet>> z;
  std::vector<double> mult;
};

NodeData build(const EnsembleModel& model, const Contour& c, bool single) {
  NodeData d;
  std::size_t n = c.nodes.size();
  d.u = c.nodes;
  d.wt = c.weights;
  d.xi.resize(n);
  d.psi.assign(n, 0.0);
  d.dpsi.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) d.xi[j] = xi(c.nodes[j]);
  std::size_t start = 0;
  for (std::size_t j = 1; j < n; ++j)
    if (c.nodes[j].real() > c.nodes[start].real()) start = j;
  const auto& groups = model.groups();
  std::size_t ng = single ? 1 : groups.size();
  for (std::size_t g = 0; g < ng; ++g) {
    const SpectralMeasure& mu = groups[g].first;
    double mult = single ? 1.0 : static_cast<double>(groups[g].second);
    std::vector<Jet> jets = m_inverse_contour(mu, c.nodes);
    std::vector<Cx> logs(n);
    for (std::size_t j = 0; j < n; ++j) {
      Cx u = c.nodes[j];
      logs[j] = std::log(u / (u - 1.0) * jets[j].val());
    }
    unwrap_closed(logs, start);
    for (std::size_t j = 0; j < n; ++j) {
      Cx u = c.nodes[j];
      d.psi[j] -= mult * logs[j];
      d.dpsi[j] -= mult * (1.0 / u - 1.0 / (u - 1.0) + jets[j].d1() / jets[j].val());
    }
    if (has_lambda(mu)) {
      d.z.push_back(std::move(jets));
      d.mult.push_back(mult);
    }
  }
  return d;
}

Cx ipow_cx(Cx x, int k) {
  Cx r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

double abs_sum(const std::vector<Cx>& v) {
  double s = 0.0;
  for (const Cx& x : v) s += std::abs(x);
  return s;
}

// sum_{i in a, j in b} a_i b_j Lambda(u_i, w_j) with Lambda summed over groups.
// *magnitude receives a bound on the sum of absolute terms.
Cx lambda_double(const NodeData& a, const std::vector<Cx>& fa, const NodeData& b,
                 const std::vector<Cx>& fb, double* magnitude) {
  *magnitude = 0.0;
  if (a.z.empty()) return 0.0;
  std::size_t na = a.u.size(), nb = b.u.size();
  std::vector<Cx> row(na), wa(na);
  for (std::size_t i = 0; i < na; ++i) wa[i] = a.wt[i] * fa[i];
  Cx total = 0.0;
  double row_max = 0.0, b_abs = 0.0;
  for (std::size_t j = 0; j < nb; ++j) {
    for (std::size_t i = 0; i < na; ++i) {
      Cx v = 0.0;
      for (std::size_t g = 0; g < a.z.size(); ++g)
        v += a.mult[g] * lambda_pair(a.u[i], a.z[g][i], b.u[j], b.z[g][j]);
      row[i] = v;
      row_max = std::max(row_max, std::abs(v));
    }
    total += b.wt[j] * fb[j] * simd::weighted_sum(row.data(), wa.data(), na);
    b_abs += std::abs(b.wt[j] * fb[j]);
  }
  *magnitude = row_max * abs_sum(wa) * b_abs;
  return total;
}

QuadSample single_sum(const NodeData& d, const std::vector<Cx>& f) {
  std::vector<Cx> wf(f.size());
  for (std::size_t j = 0; j < f.size(); ++j) wf[j] = d.wt[j] * f[j];
  return {simd::weighted_sum(f.data(), d.wt.data(), f.size()), abs_sum(wf)};
}

Prediction finish(const std::string& name, int k, int l, const QuadResult& q, const ContourSpec& spec) {
  Prediction p;
  p.statistic = name;
  p.k = k;
  p.l = l;
  p.value = q.value.real();
  p.imag_residue = q.value.imag();
  p.quadrature_error = q.error;
  p.nodes = q.nodes;
  p.contour = spec;
  return p;
}

Prediction zero_prediction(const std::string& name, int k, int l, const ContourSpec& spec) {
  Prediction p;
  p.statistic = name;
  p.k = k;
  p.l = l;
  p.contour = spec;
  return p;
}

void require_regime(const EnsembleModel& m, Regime r) {
  if (m.regime() != r) throw DomainError("model regime does not match the requested statistic");
}

// kl a^{k-1} b^l [ \oint\oint Xi Xi Psi^{k-1} Psi^{l-1} Lambda + \oint Xi Psi^{k+l-2} Psi' ].
Prediction lyapunov_cov(const EnsembleModel& model, int k, int l, double a, double b,
                        const std::string& name, const ContourSpec& spec) {
  if (k < 1 || l < 1) throw DomainError("covariance indices must be >= 1");
  if (model.degenerate()) return zero_prediction(name, k, l, spec);
  Curve ci = stadium(spec.eps_inner, spec.phase), co = stadium(spec.eps_outer, spec.phase);
  auto est = [&](int n) {
    NodeData in = build(model, discretize(ci, n, ContourLabel::Inner), true);
    std::size_t N = in.u.size();
    std::vector<Cx> f(N);
    for (std::size_t j = 0; j < N; ++j) f[j] = in.xi[j] * ipow_cx(in.psi[j], k + l - 2) * in.dpsi[j];
    QuadSample v = single_sum(in, f);
    if (!in.z.empty()) {
      NodeData out = build(model, discretize(co, n, ContourLabel::Outer), true);
      std::vector<Cx> fu(N), fw(N);
      for (std::size_t j = 0; j < N; ++j) {
        fu[j] = in.xi[j] * ipow_cx(in.psi[j], k - 1);
        fw[j] = out.xi[j] * ipow_cx(out.psi[j], l - 1);
      }
      double mag = 0.0;
      v.value += lambda_double(in, fu, out, fw, &mag);
      v.magnitude += mag;
    }
    double c = double(k) * l * std::pow(a, k - 1) * std::pow(b, l);
    return QuadSample{v.value * c, v.magnitude * std::abs(c)};
  };
  return finish(name, k, l, converge(est, spec.quad), spec);
}

}  // namespace

// ---------------------------------------------------------------- model

EnsembleModel EnsembleModel::identical(const SpectralMeasure& mu, int M, Regime regime) {
  if (M < 1) throw DomainError("factor count must be >= 1");
  if (mu.kind() == SpectralMeasure::Kind::FreePower)
    throw DomainError("factor measures must not be free powers; pass the base and M");
  EnsembleModel m;
  m.groups_.push_back({mu, M});
  m.regime_ = regime;
  return m;
}

EnsembleModel EnsembleModel::factor_list(const std::vector<SpectralMeasure>& factors) {
  if (factors.empty()) throw DomainError("factor list is empty");
  EnsembleModel m;
  for (const auto& f : factors) {
    if (f.kind() == SpectralMeasure::Kind::FreePower)
      throw DomainError("factor measures must not be free powers");
    m.groups_.push_back({f, 1});
  }
  m.regime_ = Regime::FixedM;
  return m;
}

int EnsembleModel::M() const {
  int s = 0;
  for (const auto& g : groups_) s += g.second;
  return s;
}

bool EnsembleModel::degenerate() const {
  return std::all_of(groups_.begin(), groups_.end(), [](const auto& g) { return g.first.is_degenerate(); });
}

Cx EnsembleModel::psi(Cx u) const {
  Cx acc = 0.0;
  std::size_t ng = regime_ == Regime::Lyapunov ? 1 : groups_.size();
  for (std::size_t g = 0; g < ng; ++g) {
    double mult = regime_ == Regime::Lyapunov ? 1.0 : groups_[g].second;
    acc -= mult * std::log(s_transform(groups_[g].first, u - 1.0));
  }
  return acc;
}

Cx EnsembleModel::lambda2(Cx u, Cx w) const {
  Cx acc = 0.0;
  std::size_t ng = regime_ == Regime::Lyapunov ? 1 : groups_.size();
  for (std::size_t g = 0; g < ng; ++g) {
    const SpectralMeasure& mu = groups_[g].first;
    if (!has_lambda(mu)) continue;
    double mult = regime_ == Regime::Lyapunov ? 1.0 : groups_[g].second;
    InverseBranch bu(mu), bw(mu);
    Jet zu = bu.at(u), zw = bw.at(w);
    if (std::abs(u - w) < 1e-4) {
      InverseBranch bm(mu);
      acc += mult * lambda_diag(bm.at(0.5 * (u + w)));
    } else {
      acc += mult * lambda_pair(u, zu, w, zw);
    }
  }
  return acc;
}

Cx xi(Cx u) {
  if (u.real() >= -1e-12 && u.real() <= 1.0 + 1e-12 && std::abs(u.imag()) < 1e-12)
    throw OnCut("Xi is cut along [0, 1]");
  return std::log(u / (u - 1.0));
}

// ---------------------------------------------------------------- contour predictions

Prediction lln_moment_fixedM(const EnsembleModel& model, int k, const ContourSpec& spec) {
  require_regime(model, Regime::FixedM);
  if (k < 0) throw DomainError("moment index must be >= 0");
  Curve c = stadium(spec.eps_inner, spec.phase);
  auto est = [&](int n) {
    NodeData d = build(model, discretize(c, n), false);
    std::vector<Cx> f(d.u.size());
    for (std::size_t j = 0; j < f.size(); ++j) f[j] = ipow_cx(d.xi[j] + d.psi[j], k + 1);
    QuadSample q = single_sum(d, f);
    return QuadSample{q.value / double(k + 1), q.magnitude / double(k + 1)};
  };
  return finish("lln_moment_fixedM", k, 0, converge(est, spec.quad), spec);
}

Prediction clt_cov_fixedM(const EnsembleModel& model, int k, int l, const ContourSpec& spec) {
  require_regime(model, Regime::FixedM);
  if (k < 1 || l < 1) throw DomainError("covariance indices must be >= 1");
  if (model.degenerate()) return zero_prediction("clt_cov_fixedM", k, l, spec);
  Curve ci = stadium(spec.eps_inner, spec.phase), co = stadium(spec.eps_outer, spec.phase);
  auto est = [&](int n) {
    NodeData in = build(model, discretize(ci, n, ContourLabel::Inner), false);
    NodeData out = build(model, discretize(co, n, ContourLabel::Outer), false);
    std::size_t N = in.u.size();
    std::vector<Cx> fu(N), fw(N);
    for (std::size_t j = 0; j < N; ++j) {
      fu[j] = ipow_cx(in.xi[j] + in.psi[j], l);
      fw[j] = ipow_cx(out.xi[j] + out.psi[j], k);
    }
    // 1/(u - w)^2 part; the two stadiums are eps_outer - eps_inner apart
    std::vector<Cx> row(N), wa(N);
    for (std::size_t i = 0; i < N; ++i) wa[i] = in.wt[i] * fu[i];
    Cx v = 0.0;
    double out_abs = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
      for (std::size_t i = 0; i < N; ++i) {
        Cx h = in.u[i] - out.u[j];
        row[i] = 1.0 / (h * h);
      }
      v += out.wt[j] * fw[j] * simd::weighted_sum(row.data(), wa.data(), N);
      out_abs += std::abs(out.wt[j] * fw[j]);
    }
    double gap = spec.eps_outer - spec.eps_inner;
    double mag = 0.0;
    v += lambda_double(in, fu, out, fw, &mag);
    return QuadSample{v, mag + abs_sum(wa) * out_abs / (gap * gap)};
  };
  return finish("clt_cov_fixedM", k, l, converge(est, spec.quad), spec);
}

Prediction lln_moment_lyapunov(const EnsembleModel& model, int k, const ContourSpec& spec) {
  require_regime(model, Regime::Lyapunov);
  if (k < 0) throw DomainError("moment index must be >= 0");
  Curve c = stadium(spec.eps_inner, spec.phase);
  auto est = [&](int n) {
    NodeData d = build(model, discretize(c, n), true);
    std::vector<Cx> f(d.u.size());
    for (std::size_t j = 0; j < f.size(); ++j) f[j] = d.xi[j] * ipow_cx(d.psi[j], k);
    return single_sum(d, f);
  };
  return finish("lln_moment_lyapunov", k, 0, converge(est, spec.quad), spec);
}

Prediction clt_cov_lyapunov(const EnsembleModel& model, int k, int l, const ContourSpec& spec) {
  require_regime(model, Regime::Lyapunov);
  return lyapunov_cov(model, k, l, 1.0, 1.0, "clt_cov_lyapunov", spec);
}

Prediction cov_2d(const EnsembleModel& model, int k, double alpha, int l, double beta,
                  const ContourSpec& spec) {
  require_regime(model, Regime::Lyapunov);
  if (!(beta > 0.0) || !(alpha <= 1.0)) throw DomainError("fractions must lie in (0, 1]");
  if (beta > alpha) throw OrderViolation("cov_2d needs beta <= alpha");
  return lyapunov_cov(model, k, l, alpha, beta, "cov_2d", spec);
}

// ---------------------------------------------------------------- Lyapunov regime on the real line

namespace {

// w in [-1, 0] with S(w) = y.
double s_inverse(const SpectralMeasure& mu, double y) {
  if (mu.is_degenerate()) throw OutOfSupport("S is constant for a degenerate measure");
  double s0 = s_transform_real(mu, 0.0), s1 = s_transform_real(mu, -1.0);
  if (y < s0 * (1.0 - 1e-14) || y > s1 * (1.0 + 1e-14)) throw OutOfSupport("value outside S([-1, 0])");
  double lo = -1.0, hi = 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
    double mid = 0.5 * (lo + hi);
    if (s_transform_real(mu, mid) > y) lo = mid;
    else hi = mid;
  }
  double w = 0.5 * (lo + hi);
  // polish with Newton away from the endpoints
  if (w > -1.0 + 1e-8 && w < -1e-8) {
    for (int it = 0; it < 3; ++it) {
      Jet s = s_jet_real(mu, w);
      double wn = w - (s.val().real() - y) / s.d1().real();
      if (wn <= -1.0 || wn >= 0.0) break;
      w = wn;
    }
  }
  return w;
}

double s_prime(const SpectralMeasure& mu, double w) {
  w = std::clamp(w, -1.0 + 1e-9, -1e-9);
  return s_jet_real(mu, w).d1().real();
}

// Lyapunov density at unit scale and the matching point u = S^{-1}(e^{-t}) + 1.
double q_and_u(const SpectralMeasure& mu, double t, double& u) {
  auto [a, b] = lyapunov_support(mu);
  if (t < a - 1e-12 || t > b + 1e-12) throw OutOfSupport("point outside the Lyapunov support");
  double y = std::exp(-t);
  double w = s_inverse(mu, std::clamp(y, std::exp(-b), std::exp(-a)));
  u = w + 1.0;
  return -y / s_prime(mu, w);
}

double h_real(const SpectralMeasure& mu, double u, double w) {
  if (std::abs(u - w) < 1e-4) {
    double m = std::clamp(0.5 * (u + w), 1e-9, 1.0 - 1e-9);
    return lambda_diag(z_jet_real(mu, m)).real();
  }
  u = std::clamp(u, 1e-9, 1.0 - 1e-9);
  w = std::clamp(w, 1e-9, 1.0 - 1e-9);
  return lambda_pair(u, z_jet_real(mu, u), w, z_jet_real(mu, w)).real();
}

}  // namespace

std::pair<double, double> lyapunov_support(const SpectralMeasure& mu) {
  return {-std::log(s_transform_real(mu, -1.0)), -std::log(s_transform_real(mu, 0.0))};
}

double lyapunov_density(const SpectralMeasure& mu, double z) {
  double u;
  return q_and_u(mu, z, u);
}

KernelValue lyapunov_kernel(const SpectralMeasure& mu, double t, double s) {
  return kernel_2d(mu, t, 1.0, s, 1.0);
}

KernelValue kernel_2d(const SpectralMeasure& mu, double t, double alpha, double s, double beta) {
  if (!(beta > 0.0) || !(alpha <= 1.0)) throw DomainError("fractions must lie in (0, 1]");
  if (beta > alpha) throw OrderViolation("kernel_2d needs beta <= alpha");
  KernelValue kv;
  double tt = t / alpha, ss = s / beta;
  kv.delta_coeff = std::abs(tt - ss) <= 1e-12 * (1.0 + std::abs(tt)) ? 1.0 / alpha : 0.0;
  if (mu.kind() == SpectralMeasure::Kind::PointMass) return kv;
  double ut, us;
  double qt = q_and_u(mu, tt, ut), qs = q_and_u(mu, ss, us);
  if (has_lambda(mu)) kv.smooth = h_real(mu, ut, us) * qt * qs / alpha;
  return kv;
}

// ---------------------------------------------------------------- fixed-M height kernel

double height_kernel_finiteM(const SpectralMeasure& product, double t, double s) {
  if (product.kind() != SpectralMeasure::Kind::FreePower || product.power() == 1) return 0.0;
  int M = product.power();
  BoundaryValue bt = boundary_value(product, t), bs = boundary_value(product, s);
  if (!(bt.w.imag() > 0.0) || !(bs.w.imag() > 0.0))
    throw OutOfSupport("height kernel needs points where the product density is positive");
  auto L = [](Cx a, Cx b) { return std::log(std::abs((a - b) / (a - std::conj(b)))); };
  double l0 = L(bt.w, bs.w), l1 = L(bt.omega, bs.omega);
  return -((1.0 - M) * l0 + M * l1) / (2.0 * kPi * kPi);
}

double log_corr_constant(const SpectralMeasure& product, double t) {
  if (product.kind() != SpectralMeasure::Kind::FreePower || product.power() == 1)
    throw DomainError("the log-correlation constant needs M >= 2");
  int M = product.power();
  BoundaryValue b = boundary_value(product, t);
  double p = b.w.imag() / kPi;
  if (!(p > 0.0)) throw OutOfSupport("density vanishes at t");
  double c0 = -std::log(std::abs(b.dw_dt / (2.0 * kPi * p)));
  double c1 = M * std::log(std::abs(2.0 * b.omega.imag() * b.mb_prime / (2.0 * kPi * p)));
  return (c0 + c1) / (2.0 * kPi * kPi);
}

}  // namespace rmtp
