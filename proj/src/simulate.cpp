#include "rmtp/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <cstdio>
#include <exception>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <mutex>
#include <thread>

#include "rmtp/bigfloat.hpp"
#include "rmtp/errors.hpp"

namespace rmtp {

namespace {

constexpr double kLn2 = 0.69314718055994530942;

std::vector<double> sorted_desc(std::vector<double> v) {
  std::sort(v.begin(), v.end(), std::greater<>());
  return v;
}

CMatrix gaussian(int rows, int cols, double var, Philox& rng) {
  CMatrix z(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) z(i, j) = rng.cnormal(var);
  return z;
}

std::vector<int> checkpoint_steps(const std::vector<double>& alphas, int M) {
  std::vector<int> steps;
  for (double a : alphas) {
    if (!(a > 0.0 && a <= 1.0)) throw DomainError("checkpoint fractions must lie in (0, 1]");
    int k = static_cast<int>(std::floor(a * M + 1e-12));
    if (k < 1) throw DomainError("checkpoint fraction selects zero factors");
    steps.push_back(k);
  }
  return steps;
}

}  // namespace

FactorSpec FactorSpec::fixed(std::vector<double> log_eigs) {
  FactorSpec s;
  s.kind = Kind::FixedSpectrum;
  s.N = static_cast<int>(log_eigs.size());
  s.lambda = sorted_desc(std::move(log_eigs));
  s.validate();
  return s;
}

FactorSpec FactorSpec::jacobi(int N, int alpha, int R) {
  FactorSpec s;
  s.kind = Kind::Jacobi;
  s.N = N;
  s.alpha = alpha;
  s.R = R;
  s.validate();
  return s;
}

FactorSpec FactorSpec::ginibre(int N, int L) {
  FactorSpec s;
  s.kind = Kind::Ginibre;
  s.N = N;
  s.L = L;
  s.validate();
  return s;
}

void FactorSpec::validate() const {
  if (N < 1) throw DomainError("factor dimension N must be >= 1");
  switch (kind) {
    case Kind::FixedSpectrum:
      if (static_cast<int>(lambda.size()) != N) throw DomainError("fixed spectrum needs N log-eigenvalues");
      for (double v : lambda)
        if (!std::isfinite(v)) throw DomainError("fixed spectrum entries must be finite");
      break;
    case Kind::Jacobi:
      if (alpha < 1 || R < N) throw DomainError("Jacobi factor needs alpha >= 1 and R >= N");
      break;
    case Kind::Ginibre:
      if (L < N) throw DomainError("Ginibre factor needs L >= N");
      break;
  }
}

SpectralMeasure limit_measure(const FactorSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case FactorSpec::Kind::FixedSpectrum: {
      bool constant = std::all_of(spec.lambda.begin(), spec.lambda.end(),
                                  [&](double v) { return v == spec.lambda.front(); });
      if (constant) return SpectralMeasure::point_mass(spec.lambda.front());
      return SpectralMeasure::uniform_atoms(spec.lambda);
    }
    case FactorSpec::Kind::Jacobi:
      return SpectralMeasure::jacobi(static_cast<double>(spec.alpha) / spec.N,
                                     static_cast<double>(spec.R) / spec.N);
    case FactorSpec::Kind::Ginibre:
      return SpectralMeasure::ginibre(static_cast<double>(spec.L) / spec.N);
  }
  throw DomainError("unknown factor kind");
}

std::vector<double> quantile_spectrum(const SpectralMeasure& mu, int N) {
  if (N < 1) throw DomainError("quantile spectrum needs N >= 1");
  std::vector<double> out(N);
  if (mu.kind() == SpectralMeasure::Kind::PointMass) {
    std::fill(out.begin(), out.end(), mu.x0());
    return out;
  }
  if (mu.kind() == SpectralMeasure::Kind::Atomic) {
    std::vector<std::size_t> idx(mu.points().size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return mu.points()[a] < mu.points()[b]; });
    for (int i = 0; i < N; ++i) {
      double q = (N - (i + 1) + 0.5) / N, cum = 0.0;
      out[i] = mu.points()[idx.back()];
      for (auto j : idx) {
        cum += mu.weights()[j];
        if (cum >= q - 1e-12) {
          out[i] = mu.points()[j];
          break;
        }
      }
    }
    return out;
  }
  auto [a, b] = support(mu);
  const int n = 4000;
  std::vector<double> t(n + 1), cdf(n + 1, 0.0);
  double prev = 0.0;
  for (int j = 0; j <= n; ++j) {
    // cosine grid clusters nodes at the square-root edges
    t[j] = a + (b - a) * 0.5 * (1.0 - std::cos(M_PI * j / n));
    double d = (j == 0 || j == n) ? 0.0 : std::max(0.0, density_from_boundary(mu, t[j]));
    if (j > 0) cdf[j] = cdf[j - 1] + 0.5 * (d + prev) * (t[j] - t[j - 1]);
    prev = d;
  }
  for (double& c : cdf) c /= cdf.back();
  for (int i = 0; i < N; ++i) {
    double q = (N - (i + 1) + 0.5) / N;
    auto it = std::lower_bound(cdf.begin(), cdf.end(), q);
    std::size_t j = std::clamp<std::size_t>(it - cdf.begin(), 1, n);
    double f = (q - cdf[j - 1]) / std::max(cdf[j] - cdf[j - 1], 1e-300);
    out[i] = t[j - 1] + f * (t[j] - t[j - 1]);
  }
  return out;
}

CMatrix sample_haar_unitary(int N, Philox& rng) {
  if (N < 1) throw DomainError("Haar unitary needs N >= 1");
  CMatrix z = gaussian(N, N, 1.0, rng);
  Eigen::HouseholderQR<CMatrix> qr(z);
  CMatrix q = qr.householderQ();
  const CMatrix& r = qr.matrixQR();
  for (int j = 0; j < N; ++j) {
    Cx d = r(j, j);
    double a = std::abs(d);
    q.col(j) *= a > 0.0 ? d / a : Cx(1.0);
  }
  return q;
}

CMatrix sample_ginibre(int L, int N, Philox& rng) {
  if (L < 1 || N < 1) throw DomainError("Ginibre matrix needs L, N >= 1");
  return gaussian(L, N, 1.0 / N, rng);
}

std::vector<double> sample_factor_eigs(const FactorSpec& spec, Philox& rng) {
  int N = spec.N;
  std::vector<double> e(N);
  switch (spec.kind) {
    case FactorSpec::Kind::FixedSpectrum:
      for (int i = 0; i < N; ++i) e[i] = std::exp(spec.lambda[i]);
      return e;
    case FactorSpec::Kind::Ginibre: {
      CMatrix g = sample_ginibre(spec.L, N, rng);
      Eigen::JacobiSVD<CMatrix> svd(g);
      for (int i = 0; i < N; ++i) e[i] = svd.singularValues()(i) * svd.singularValues()(i);
      return sorted_desc(e);
    }
    case FactorSpec::Kind::Jacobi: {
      CMatrix a = gaussian(N, spec.alpha + N - 1, 1.0, rng);
      CMatrix b = gaussian(N, spec.R, 1.0, rng);
      CMatrix w1 = a * a.adjoint();
      CMatrix w = w1 + b * b.adjoint();
      Eigen::LLT<CMatrix> llt(w);
      CMatrix linv = llt.matrixL().solve(CMatrix::Identity(N, N));
      CMatrix c = linv * w1 * linv.adjoint();
      c = 0.5 * (c + c.adjoint()).eval();
      Eigen::SelfAdjointEigenSolver<CMatrix> es(c, Eigen::EigenvaluesOnly);
      for (int i = 0; i < N; ++i) e[i] = std::clamp(es.eigenvalues()(i), 1e-300, 1.0);
      return sorted_desc(e);
    }
  }
  return e;
}

CMatrix sample_factor(const FactorSpec& spec, Philox& rng) {
  std::vector<double> e = sample_factor_eigs(spec, rng);
  CMatrix u = sample_haar_unitary(spec.N, rng);
  for (int i = 0; i < spec.N; ++i) u.row(i) *= std::sqrt(e[i]);
  return u;
}

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::Direct: return "direct";
    case Backend::BigFloat: return "bigfloat";
    case Backend::Qr: return "qr";
  }
  return "?";
}

Backend parse_backend(const std::string& s) {
  if (s == "direct") return Backend::Direct;
  if (s == "bigfloat") return Backend::BigFloat;
  if (s == "qr") return Backend::Qr;
  throw ConfigError("unknown backend '" + s + "'");
}

template <class Real>
std::vector<double> jacobi_log_sv2(const Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>& in) {
  using C = std::complex<Real>;
  auto a = in;
  int rows = static_cast<int>(a.rows()), n = static_cast<int>(a.cols());
  const Real tol = std::numeric_limits<Real>::epsilon() * rows;
  for (int sweep = 0; sweep < 80; ++sweep) {
    bool rotated = false;
    for (int p = 0; p < n - 1; ++p)
      for (int q = p + 1; q < n; ++q) {
        Real alpha = a.col(p).squaredNorm(), beta = a.col(q).squaredNorm();
        C g = a.col(p).dot(a.col(q));  // conj(a_p) . a_q
        Real ag = std::abs(g);
        if (ag == Real(0) || ag <= tol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        Real zeta = (beta - alpha) / (2 * ag);
        Real t = 1 / (std::abs(zeta) + std::sqrt(1 + zeta * zeta));
        if (zeta < 0) t = -t;
        Real c = 1 / std::sqrt(1 + t * t), s = c * t;
        C ph = std::conj(g) / ag;
        for (int i = 0; i < rows; ++i) {
          C aq = ph * a(i, q), ap = a(i, p);
          a(i, p) = c * ap - s * aq;
          a(i, q) = s * ap + c * aq;
        }
      }
    if (!rotated) break;
  }
  std::vector<double> out(n);
  for (int p = 0; p < n; ++p) out[p] = static_cast<double>(std::log(a.col(p).squaredNorm()));
  return sorted_desc(out);
}

template std::vector<double> jacobi_log_sv2<double>(const Eigen::MatrixXcd&);
template std::vector<double> jacobi_log_sv2<long double>(
    const Eigen::Matrix<std::complex<long double>, Eigen::Dynamic, Eigen::Dynamic>&);

std::vector<double> qr_diag_logs(const CMatrix& y) {
  Eigen::HouseholderQR<CMatrix> qr(y);
  int n = static_cast<int>(std::min(y.rows(), y.cols()));
  std::vector<double> out(n);
  for (int k = 0; k < n; ++k) out[k] = 2.0 * std::log(std::abs(qr.matrixQR()(k, k)));
  return out;
}

std::vector<double> cholesky_diag_logs(const FactorSpec& spec, Philox& rng) {
  // R of Y = QR is the Cholesky factor of Y*Y
  return qr_diag_logs(sample_factor(spec, rng));
}

CMatrix additive_sum_sample(const std::vector<double>& mu, int M, Philox& rng) {
  int N = static_cast<int>(mu.size());
  if (N < 2) throw DomainError("additive sum needs N >= 2");
  if (M < 1) throw DomainError("additive sum needs M >= 1");
  double mean = 0.0;
  for (double v : mu) mean += v / N;
  CMatrix x = CMatrix::Zero(N, N);
  Eigen::VectorXcd d(N);
  for (int i = 0; i < N; ++i) d(i) = mu[i];
  for (int m = 0; m < M; ++m) {
    CMatrix u = sample_haar_unitary(N, rng);
    x.noalias() += u * d.asDiagonal() * u.adjoint();
  }
  x -= static_cast<double>(M) * mean * CMatrix::Identity(N, N);
  return x / std::sqrt(static_cast<double>(M));
}

namespace {

ProductResult run_bigfloat(const std::vector<CMatrix>& ys, const std::vector<double>& spreads,
                           const std::vector<int>& steps, const std::vector<double>& alphas, int N) {
  if (N > 32) throw PrecisionBudgetExceeded("bigfloat backend supports N <= 32");
  // cond(B_k) <= exp(sum_{j<=k} spread_j / 2); rounding at step k at that many bits plus 64 guard
  // bits is a relative right perturbation B_k (I + F) with |F| <= 2^-64, which moves every
  // singular value of the final product by the same relative amount
  auto bits_for = [](double log_cond) { return static_cast<long>(std::ceil(log_cond / kLn2)) + 64; };
  double total = 0.0;
  for (double s : spreads) total += 0.5 * s;
  if (bits_for(total) > 200000) throw PrecisionBudgetExceeded("needs " + std::to_string(bits_for(total)) + " bits");
  ProductResult res;
  res.precision_bits = static_cast<int>(bits_for(total));
  mp::Matrix b(N, N, 64), c(N, N, 64);
  for (int i = 0; i < N; ++i) mpfr_set_ui(b(i, i).re.get(), 1, MPFR_RNDN);
  std::vector<Cx> y(static_cast<std::size_t>(N) * N);
  double running = 0.0;
  for (std::size_t k = 0; k < ys.size(); ++k) {
    running += 0.5 * spreads[k];
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) y[static_cast<std::size_t>(i) * N + j] = ys[k](i, j);
    mp::left_multiply(y, N, b, c, bits_for(running));
    std::swap(b, c);
    int done = static_cast<int>(k) + 1;
    for (std::size_t a = 0; a < steps.size(); ++a)
      if (steps[a] == done && done != static_cast<int>(ys.size()))
        res.checkpoints.push_back({alphas[a], mp::jacobi_log_sv2(b)});
  }
  res.log_sv = mp::jacobi_log_sv2(b);
  for (std::size_t a = 0; a < steps.size(); ++a)
    if (steps[a] == static_cast<int>(ys.size())) res.checkpoints.push_back({alphas[a], res.log_sv});
  std::sort(res.checkpoints.begin(), res.checkpoints.end(),
            [](const auto& x, const auto& z) { return x.first < z.first; });
  return res;
}

ProductResult run_qr_like(const std::vector<CMatrix>& ys, const std::vector<int>& steps,
                          const std::vector<double>& alphas, int N, Backend backend) {
  // B_k = Q R_acc with R_acc stored as scale * Rn; QR refactoring every 8 factors (every factor for qr)
  const int every = backend == Backend::Qr ? 1 : 8;
  CMatrix q = CMatrix::Identity(N, N), rn = CMatrix::Identity(N, N), pending = CMatrix::Identity(N, N);
  double log_scale = 0.0;
  std::vector<double> diag(N, 0.0);
  int since = 0;
  ProductResult res;
  auto flush = [&]() {
    if (since == 0) return;
    CMatrix p = pending * q;
    Eigen::HouseholderQR<CMatrix> qr(p);
    CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    q = qr.householderQ();
    for (int j = 0; j < N; ++j) diag[j] += 2.0 * std::log(std::abs(r(j, j)));
    rn = (r * rn).eval();
    double m = rn.cwiseAbs().maxCoeff();
    rn /= m;
    log_scale += std::log(m);
    pending = CMatrix::Identity(N, N);
    since = 0;
  };
  auto svals = [&]() {
    std::vector<double> v = jacobi_log_sv2<double>(rn.adjoint());
    for (double& x : v) x += 2.0 * log_scale;
    return v;
  };
  for (std::size_t k = 0; k < ys.size(); ++k) {
    pending = (ys[k] * pending).eval();
    ++since;
    int done = static_cast<int>(k) + 1;
    bool at_cp = std::find(steps.begin(), steps.end(), done) != steps.end();
    if (since == every || at_cp || done == static_cast<int>(ys.size())) flush();
    if (at_cp)
      for (std::size_t a = 0; a < steps.size(); ++a)
        if (steps[a] == done)
          res.checkpoints.push_back({alphas[a], backend == Backend::Qr ? sorted_desc(diag) : svals()});
  }
  flush();
  res.qr_diag_logs = diag;
  res.log_sv = backend == Backend::Qr ? sorted_desc(diag) : svals();
  std::sort(res.checkpoints.begin(), res.checkpoints.end(),
            [](const auto& x, const auto& z) { return x.first < z.first; });
  return res;
}

}  // namespace

ProductResult product_log_singvals(const FactorSpec& spec, int M, Backend backend,
                                   const std::vector<double>& alphas, Philox& rng) {
  spec.validate();
  if (M < 1) throw DomainError("product needs M >= 1");
  int N = spec.N;
  std::vector<int> steps = checkpoint_steps(alphas, M);
  // all factors are drawn first, in the same order for every backend
  std::vector<CMatrix> ys;
  std::vector<double> spreads;
  ys.reserve(M);
  for (int k = 0; k < M; ++k) {
    std::vector<double> e = sample_factor_eigs(spec, rng);
    CMatrix u = sample_haar_unitary(N, rng);
    for (int i = 0; i < N; ++i) u.row(i) *= std::sqrt(e[i]);
    ys.push_back(std::move(u));
    spreads.push_back(std::log(e.front()) - std::log(e.back()));
  }
  ProductResult res;
  switch (backend) {
    case Backend::BigFloat:
      res = run_bigfloat(ys, spreads, steps, alphas, N);
      break;
    case Backend::Direct: {
      double total = 0.0;
      for (double s : spreads) total += s;
      if (total >= 600.0)
        throw OverflowRisk("summed factor log-spread " + std::to_string(total) + " exceeds 600; use bigfloat");
      res = run_qr_like(ys, steps, alphas, N, backend);
      break;
    }
    case Backend::Qr:
      res = run_qr_like(ys, steps, alphas, N, backend);
      break;
  }
  res.backend = backend;
  res.N = N;
  res.M = M;
  return res;
}

std::vector<ProductResult> run_trials(const TrialPlan& plan, int first, const std::vector<ProductResult>* done) {
  plan.spec.validate();
  if (plan.trials < 1) throw DomainError("trials must be >= 1");
  std::vector<ProductResult> out(plan.trials);
  std::vector<char> have(plan.trials, 0);
  if (done)
    for (const auto& r : *done)
      if (r.stream < static_cast<std::uint64_t>(plan.trials)) {
        out[r.stream] = r;
        have[r.stream] = 1;
      }
  std::atomic<int> next{first};
  std::exception_ptr err;
  std::mutex err_mu;
  auto worker = [&]() {
    for (;;) {
      int t = next.fetch_add(1);
      if (t >= plan.trials) return;
      if (have[t]) continue;
      try {
        Philox rng(plan.seed, static_cast<std::uint64_t>(t));
        ProductResult r = product_log_singvals(plan.spec, plan.M, plan.backend, plan.checkpoints, rng);
        r.seed = plan.seed;
        r.stream = static_cast<std::uint64_t>(t);
        out[t] = std::move(r);
      } catch (...) {
        std::lock_guard<std::mutex> lk(err_mu);
        if (!err) err = std::current_exception();
        next = plan.trials;
      }
    }
  };
  int nt = std::max(1, plan.threads);
  std::vector<std::thread> pool;
  for (int i = 1; i < nt; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
  return out;
}

void write_trials_csv(std::ostream& os, const std::vector<ProductResult>& rows) {
  if (rows.empty()) return;
  const ProductResult& h = rows.front();
  os << "seed,stream,backend,M,N";
  for (int i = 1; i <= h.N; ++i) os << ",sv" << i;
  for (const auto& cp : h.checkpoints) {
    std::ostringstream a;
    a << std::setprecision(17) << cp.first;
    for (int i = 1; i <= h.N; ++i) os << ",cp" << a.str() << "_sv" << i;
  }
  for (std::size_t i = 1; i <= h.qr_diag_logs.size(); ++i) os << ",qr" << i;
  os << "\n";
  char buf[40];
  for (const auto& r : rows) {
    if (r.N != h.N || r.M != h.M || r.checkpoints.size() != h.checkpoints.size() ||
        r.qr_diag_logs.size() != h.qr_diag_logs.size())
      throw MixedShapes("trial rows differ in shape");
    os << r.seed << ',' << r.stream << ',' << backend_name(r.backend) << ',' << r.M << ',' << r.N;
    auto put = [&](double v) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      os << ',' << buf;
    };
    for (double v : r.log_sv) put(v);
    for (const auto& cp : r.checkpoints)
      for (double v : cp.second) put(v);
    for (double v : r.qr_diag_logs) put(v);
    os << "\n";
  }
}

std::vector<ProductResult> read_trials_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("trial CSV is empty");
  std::vector<std::string> cols;
  {
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(c);
  }
  if (cols.size() < 6 || cols[0] != "seed" || cols[1] != "stream" || cols[2] != "backend" || cols[3] != "M" ||
      cols[4] != "N")
    throw ConfigError("trial CSV header must start with seed,stream,backend,M,N");
  int nsv = 0;
  std::vector<double> alphas;
  int nqr = 0;
  for (std::size_t i = 5; i < cols.size(); ++i) {
    const std::string& c = cols[i];
    if (c.rfind("sv", 0) == 0) {
      ++nsv;
    } else if (c.rfind("cp", 0) == 0) {
      auto pos = c.find("_sv");
      if (pos == std::string::npos) throw ConfigError("bad checkpoint column '" + c + "'");
      double a = std::stod(c.substr(2, pos - 2));
      if (alphas.empty() || alphas.back() != a) alphas.push_back(a);
    } else if (c.rfind("qr", 0) == 0) {
      ++nqr;
    } else {
      throw ConfigError("unknown CSV column '" + c + "'");
    }
  }
  std::vector<ProductResult> rows;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) f.push_back(c);
    if (f.size() != cols.size())
      throw ConfigError("line " + std::to_string(lineno) + ": expected " + std::to_string(cols.size()) +
                        " fields, got " + std::to_string(f.size()));
    try {
      ProductResult r;
      std::size_t used = 0;
      r.seed = std::stoull(f[0], &used);
      r.stream = std::stoull(f[1]);
      r.backend = parse_backend(f[2]);
      r.M = std::stoi(f[3]);
      r.N = std::stoi(f[4]);
      if (r.N != nsv) throw ConfigError("N does not match the number of sv columns");
      std::size_t k = 5;
      auto num = [&](const std::string& s) {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw ConfigError("trailing characters in '" + s + "'");
        return v;
      };
      for (int i = 0; i < nsv; ++i) r.log_sv.push_back(num(f[k++]));
      for (double a : alphas) {
        std::vector<double> v;
        for (int i = 0; i < nsv; ++i) v.push_back(num(f[k++]));
        r.checkpoints.push_back({a, v});
      }
      for (int i = 0; i < nqr; ++i) r.qr_diag_logs.push_back(num(f[k++]));
      rows.push_back(std::move(r));
    } catch (const Error& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    } catch (const std::exception& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": cannot parse number (" + e.what() + ")");
    }
  }
  return rows;
}

namespace {

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) throw ConfigError("checkpoint file truncated");
  return v;
}

}  // namespace

void write_checkpoint(const std::string& path, const CheckpointHeader& h, const std::vector<ProductResult>& rows) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ConfigError("cannot write checkpoint '" + path + "'");
  os.write("RMTP1", 5);
  put(os, h.version);
  put(os, h.N);
  put(os, h.M);
  put(os, h.backend);
  put(os, h.seed);
  put(os, static_cast<std::uint32_t>(h.alphas.size()));
  for (double a : h.alphas) put(os, a);
  put(os, static_cast<std::uint8_t>(h.has_qr));
  put(os, static_cast<std::uint64_t>(rows.size()));
  for (const auto& r : rows) {
    if (r.N != h.N || r.checkpoints.size() != h.alphas.size()) throw MixedShapes("record does not match header");
    put(os, r.stream);
    put(os, static_cast<std::int32_t>(r.precision_bits));
    for (double v : r.log_sv) put(os, v);
    for (const auto& cp : r.checkpoints)
      for (double v : cp.second) put(os, v);
    if (h.has_qr)
      for (int i = 0; i < h.N; ++i) put(os, i < static_cast<int>(r.qr_diag_logs.size()) ? r.qr_diag_logs[i] : 0.0);
  }
}

std::vector<ProductResult> read_checkpoint(const std::string& path, CheckpointHeader& h) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open checkpoint '" + path + "'");
  char magic[5];
  is.read(magic, 5);
  if (!is || std::memcmp(magic, "RMTP1", 5) != 0) throw ConfigError("not an RMTP1 checkpoint file");
  h.version = get<std::uint32_t>(is);
  if (h.version != 1) throw ConfigError("unsupported checkpoint version " + std::to_string(h.version));
  h.N = get<std::int32_t>(is);
  h.M = get<std::int32_t>(is);
  h.backend = get<std::int32_t>(is);
  h.seed = get<std::uint64_t>(is);
  auto na = get<std::uint32_t>(is);
  h.alphas.clear();
  for (std::uint32_t i = 0; i < na; ++i) h.alphas.push_back(get<double>(is));
  h.has_qr = get<std::uint8_t>(is) != 0;
  auto n = get<std::uint64_t>(is);
  std::vector<ProductResult> rows;
  for (std::uint64_t t = 0; t < n; ++t) {
    ProductResult r;
    r.N = h.N;
    r.M = h.M;
    r.seed = h.seed;
    r.backend = static_cast<Backend>(h.backend);
    r.stream = get<std::uint64_t>(is);
    r.precision_bits = get<std::int32_t>(is);
    for (int i = 0; i < h.N; ++i) r.log_sv.push_back(get<double>(is));
    for (double a : h.alphas) {
      std::vector<double> v;
      for (int i = 0; i < h.N; ++i) v.push_back(get<double>(is));
      r.checkpoints.push_back({a, v});
    }
    if (h.has_qr)
      for (int i = 0; i < h.N; ++i) r.qr_diag_logs.push_back(get<double>(is));
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace rmtp
