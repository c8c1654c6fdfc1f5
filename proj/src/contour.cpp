#include "rmtp/contour.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>

#include "rmtp/errors.hpp"
#include "rmtp/simd.hpp"

namespace rmtp {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;
const Cx kI(0.0, 1.0);

double wrap(double s) {
  s = std::fmod(s, kTwoPi);
  return s < 0 ? s + kTwoPi : s;
}

}  // namespace

Curve stadium(double eps, double phase, int p) {
  if (!(eps > 0.0)) throw DomainError("stadium needs eps > 0");
  if (p < 1) throw DomainError("sigmoid order must be >= 1");
  auto locate = [](double s, int& k, double& tau) {
    s = wrap(s);
    k = std::min(3, static_cast<int>(s / (0.5 * kPi)));
    tau = (s - k * 0.5 * kPi) / (0.5 * kPi);
  };
  auto sig = [p](double tau, double& ds) {
    double a = std::pow(tau, p), b = std::pow(1.0 - tau, p);
    double den = a + b;
    ds = p * std::pow(tau, p - 1) * std::pow(1.0 - tau, p - 1) / (den * den);
    return a / den;
  };
  Curve c;
  c.phase = phase;
  c.point = [=](double s) {
    int k;
    double tau, ds;
    locate(s, k, tau);
    double sg = sig(tau, ds);
    switch (k) {
      case 0: return Cx(sg, -eps);
      case 1: return Cx(1.0, 0.0) + eps * std::polar(1.0, -0.5 * kPi + kPi * sg);
      case 2: return Cx(1.0 - sg, eps);
      default: return eps * std::polar(1.0, 0.5 * kPi + kPi * sg);
    }
  };
  c.deriv = [=](double s) {
    int k;
    double tau, ds;
    locate(s, k, tau);
    double sg = sig(tau, ds);
    Cx dz;
    switch (k) {
      case 0: dz = 1.0; break;
      case 1: dz = kI * kPi * eps * std::polar(1.0, -0.5 * kPi + kPi * sg); break;
      case 2: dz = -1.0; break;
      default: dz = kI * kPi * eps * std::polar(1.0, 0.5 * kPi + kPi * sg); break;
    }
    return dz * ds * (2.0 / kPi);
  };
  return c;
}

Curve circle(Cx center, double radius, double phase) {
  if (!(radius > 0.0)) throw DomainError("circle needs radius > 0");
  Curve c;
  c.phase = phase;
  c.point = [=](double s) { return center + radius * std::polar(1.0, s); };
  c.deriv = [=](double s) { return kI * radius * std::polar(1.0, s); };
  return c;
}

Contour discretize(const Curve& c, int n, ContourLabel label) {
  if (n < 4) throw DomainError("contour needs at least 4 nodes");
  Contour out;
  out.label = label;
  out.nodes.resize(n);
  out.weights.resize(n);
  for (int j = 0; j < n; ++j) {
    double s = c.phase + kTwoPi * j / n;
    out.nodes[j] = c.point(s);
    out.weights[j] = c.deriv(s) / (kI * static_cast<double>(n));
  }
  return out;
}

double winding_number(const Contour& c, Cx p) {
  std::size_t n = c.nodes.size();
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) total += std::arg((c.nodes[(j + 1) % n] - p) / (c.nodes[j] - p));
  return total / kTwoPi;
}

QuadResult converge(const std::function<Cx(int)>& estimate, const QuadOptions& opt) {
  return converge([&](int n) { return QuadSample{estimate(n), 0.0}; }, opt);
}

QuadResult converge(const std::function<QuadSample(int)>& estimate, const QuadOptions& opt) {
  constexpr double kRound = 64.0 * std::numeric_limits<double>::epsilon();
  int n = opt.start_nodes;
  Cx prev = estimate(n).value;
  double err = std::numeric_limits<double>::infinity();
  while (2 * n <= opt.max_nodes) {
    n *= 2;
    QuadSample cur = estimate(n);
    err = std::abs(cur.value - prev);
    prev = cur.value;
    if (err <= opt.rel_tol * std::abs(cur.value) + opt.abs_tol + kRound * cur.magnitude) return {cur.value, err, n};
  }
  std::ostringstream msg;
  msg << "contour rule did not settle by " << opt.max_nodes << " nodes (last change " << std::scientific
      << std::setprecision(3) << err << ")";
  throw QuadratureNotConverged(msg.str());
}

QuadResult contour_integral(const std::function<Cx(Cx)>& f, const Curve& c, const QuadOptions& opt) {
  // running sum of f z' over all nodes so far; doubling only evaluates the new midpoints
  Cx sum = 0.0;
  int have = 0;
  auto estimate = [&](int n) {
    std::vector<Cx> fv, dv;
    if (have == 0) {
      for (int j = 0; j < n; ++j) {
        double s = c.phase + kTwoPi * j / n;
        fv.push_back(f(c.point(s)));
        dv.push_back(c.deriv(s));
      }
    } else {
      for (int j = 0; j < have; ++j) {
        double s = c.phase + kTwoPi * (j + 0.5) / have;
        fv.push_back(f(c.point(s)));
        dv.push_back(c.deriv(s));
      }
    }
    sum += simd::weighted_sum(fv.data(), dv.data(), fv.size());
    have = n;
    return sum / (kI * static_cast<double>(n));
  };
  return converge(estimate, opt);
}

QuadResult nested_double_integral(const std::function<Cx(Cx, Cx)>& f, const Curve& inner,
                                  const Curve& outer, const QuadOptions& opt) {
  auto estimate = [&](int n) {
    Contour a = discretize(inner, n), b = discretize(outer, n);
    std::vector<Cx> row(n);
    Cx total = 0.0;
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) row[i] = f(a.nodes[i], b.nodes[j]);
      total += b.weights[j] * simd::weighted_sum(row.data(), a.weights.data(), n);
    }
    return total;
  };
  return converge(estimate, opt);
}

}  // namespace rmtp
