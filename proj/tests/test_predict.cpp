#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "doctest.h"
#include "rmtp/errors.hpp"
#include "rmtp/predict.hpp"

using namespace rmtp;

namespace {

SpectralMeasure two_atoms() { return SpectralMeasure::atomic({0.0, std::log(4.0)}, {0.5, 0.5}); }

// Gauss-Legendre-free oracle: composite Simpson on [a, b].
template <class F>
double simpson(F f, double a, double b, int n = 2000) {
  double h = (b - a) / n, s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4 : 2) * f(a + i * h);
  return s * h / 3;
}

}  // namespace

TEST_CASE("xi values and cut") {
  CHECK(std::abs(xi(Cx(2, 0)) - std::log(2.0)) < 1e-15);
  CHECK(std::abs(xi(Cx(1e6 + 1, 0)) - 1e-6) < 1e-11);
  CHECK(std::abs(xi(Cx(0.5, 0.5)) - Cx(0, -M_PI / 2)) < 1e-14);
  CHECK_THROWS_AS(xi(Cx(0.5, 0.0)), OnCut);
}

TEST_CASE("psi and lambda examples") {
  auto g = EnsembleModel::identical(SpectralMeasure::ginibre(2.0), 1, Regime::FixedM);
  CHECK(std::abs(g.psi(Cx(2, 0)) - std::log(3.0)) < 1e-12);
  auto j = EnsembleModel::identical(SpectralMeasure::jacobi(1.0, 1.0), 1, Regime::FixedM);
  Cx u(0.5, 1.0);
  CHECK(std::abs(j.psi(u) - std::log((u + 1.0) / (u + 2.0))) < 1e-12);
  auto pm = EnsembleModel::identical(SpectralMeasure::point_mass(0.3), 2, Regime::FixedM);
  CHECK(std::abs(pm.lambda2(Cx(0.5, 0.4), Cx(-0.2, 0.1))) < 1e-10);
  CHECK(std::abs(g.lambda2(Cx(0.5, 0.4), Cx(-0.2, 0.1))) == 0.0);
}

TEST_CASE("fixed-M first moments") {
  auto g = EnsembleModel::identical(SpectralMeasure::ginibre(2.0), 1, Regime::FixedM);
  CHECK(lln_moment_fixedM(g, 0).value == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(lln_moment_fixedM(g, 1).value == doctest::Approx(2 * std::log(2.0) - 1).epsilon(1e-9));
  std::vector<double> pts{-0.3, 0.1, 0.25, 0.8, 1.1};
  auto d = EnsembleModel::identical(SpectralMeasure::uniform_atoms(pts), 1, Regime::FixedM);
  for (int k = 1; k <= 3; ++k) {
    double ref = 0;
    for (double s : pts) ref += std::pow(s, k) / pts.size();
    auto p = lln_moment_fixedM(d, k);
    CHECK(p.value == doctest::Approx(ref).epsilon(1e-9));
    CHECK(std::abs(p.imag_residue) < 1e-9);
  }
}

TEST_CASE("fixed-M moments of a product match the free-power density") {
  auto m2 = EnsembleModel::identical(two_atoms(), 2, Regime::FixedM);
  auto prod = SpectralMeasure::free_power(two_atoms(), 2);
  for (int k = 1; k <= 3; ++k)
    CHECK(lln_moment_fixedM(m2, k).value ==
          doctest::Approx(integrate_density(prod, [k](double t) { return std::pow(t, k); })).epsilon(1e-4));
}

TEST_CASE("degenerate covariances vanish") {
  auto d = EnsembleModel::identical(two_atoms(), 1, Regime::FixedM);
  for (int k = 1; k <= 3; ++k)
    for (int l = 1; l <= 3; ++l) CHECK(std::abs(clt_cov_fixedM(d, k, l).value) < 1e-6);
  auto pm = EnsembleModel::identical(SpectralMeasure::point_mass(0.4), 3, Regime::FixedM);
  CHECK(pm.degenerate());
  CHECK(clt_cov_fixedM(pm, 2, 1).value == 0.0);
  auto pl = EnsembleModel::identical(SpectralMeasure::point_mass(0.4), 1, Regime::Lyapunov);
  CHECK(clt_cov_lyapunov(pl, 1, 2).value == 0.0);
}

TEST_CASE("fixed-M covariance is symmetric and positive semidefinite") {
  auto m2 = EnsembleModel::identical(two_atoms(), 2, Regime::FixedM);
  Eigen::Matrix3d c;
  for (int k = 1; k <= 3; ++k)
    for (int l = 1; l <= 3; ++l) c(k - 1, l - 1) = clt_cov_fixedM(m2, k, l).value;
  CHECK((c - c.transpose()).cwiseAbs().maxCoeff() < 1e-8);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(c);
  CHECK(es.eigenvalues().minCoeff() > -1e-8);
  CHECK(std::abs(c(0, 0)) < 1e-8);  // p_1 is the deterministic log-determinant
  CHECK(c(1, 1) > 1e-3);
}

TEST_CASE("Lyapunov predictions for Ginibre") {
  auto g = EnsembleModel::identical(SpectralMeasure::ginibre(2.0), 1, Regime::Lyapunov);
  CHECK(lln_moment_lyapunov(g, 1).value == doctest::Approx(2 * std::log(2.0) - 1).epsilon(1e-9));
  CHECK(clt_cov_lyapunov(g, 1, 1).value == doctest::Approx(std::log(2.0)).epsilon(1e-9));
  CHECK(cov_2d(g, 1, 1.0, 1, 0.5).value == doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-9));
  CHECK_THROWS_AS(cov_2d(g, 1, 0.5, 1, 1.0), OrderViolation);
  CHECK_THROWS_AS(lln_moment_fixedM(g, 1), DomainError);
}

TEST_CASE("Lyapunov moments equal the real-axis integral of -log S") {
  auto check = [](const SpectralMeasure& mu) {
    auto m = EnsembleModel::identical(mu, 1, Regime::Lyapunov);
    for (int k = 1; k <= 3; ++k) {
      double ref = simpson([&](double u) { return std::pow(-std::log(s_transform_real(mu, u - 1)), k); }, 0.0, 1.0, 400);
      CHECK(lln_moment_lyapunov(m, k).value == doctest::Approx(ref).epsilon(1e-8));
    }
  };
  check(SpectralMeasure::jacobi(1.0, 1.0));
  check(two_atoms());
  auto j = EnsembleModel::identical(SpectralMeasure::jacobi(1.0, 1.0), 1, Regime::Lyapunov);
  CHECK(lln_moment_lyapunov(j, 1).value == doctest::Approx(-(3 * std::log(3.0) - 4 * std::log(2.0))).epsilon(1e-9));
}

TEST_CASE("Lyapunov covariance from the kernel") {
  std::vector<double> pts;
  for (int i = 0; i < 8; ++i) pts.push_back(i / 7.0);
  auto mu = SpectralMeasure::uniform_atoms(pts);
  auto m = EnsembleModel::identical(mu, 1, Regime::Lyapunov);
  auto [a, b] = lyapunov_support(mu);
  // Cov(p_1, p_1) = (b^3 - a^3)/3 + double integral of t s K_smooth(t, s)
  const int n = 120;
  double acc = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double th = (i + 0.5) * M_PI / n, ph = (j + 0.5) * M_PI / n;
      double t = a + (b - a) * 0.5 * (1 - std::cos(th)), s = a + (b - a) * 0.5 * (1 - std::cos(ph));
      double wt = (b - a) * 0.5 * std::sin(th) * M_PI / n, ws = (b - a) * 0.5 * std::sin(ph) * M_PI / n;
      acc += t * s * lyapunov_kernel(mu, t, s).smooth * wt * ws;
    }
  CHECK(clt_cov_lyapunov(m, 1, 1).value == doctest::Approx(acc + (b * b * b - a * a * a) / 3).epsilon(1e-3));
  CHECK(lyapunov_kernel(mu, 0.5 * (a + b), 0.5 * (a + b)).delta_coeff == 1.0);
}

TEST_CASE("Lyapunov support and density") {
  auto g = SpectralMeasure::ginibre(2.0);
  auto [a, b] = lyapunov_support(g);
  CHECK(a == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(b == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(lyapunov_density(g, 0.3) == doctest::Approx(std::exp(0.3)).epsilon(1e-9));
  auto [c, d] = lyapunov_support(SpectralMeasure::jacobi(1.0, 1.0));
  CHECK(c == doctest::Approx(std::log(0.5)).epsilon(1e-12));
  CHECK(d == doctest::Approx(std::log(2.0 / 3.0)).epsilon(1e-12));
  double mass = simpson([&](double z) { return lyapunov_density(g, z); }, a, b, 200);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("contour independence under eps doubling and rotation") {
  auto m2 = EnsembleModel::identical(two_atoms(), 2, Regime::FixedM);
  ContourSpec s1{0.1, 0.2}, s2{0.2, 0.4}, s3{0.15, 0.30, M_PI / 2};
  for (auto [k, l] : {std::pair{2, 2}, std::pair{1, 3}}) {
    double v1 = clt_cov_fixedM(m2, k, l, s1).value;
    CHECK(std::abs(clt_cov_fixedM(m2, k, l, s2).value - v1) < 1e-8 * std::max(1.0, std::abs(v1)));
    CHECK(std::abs(clt_cov_fixedM(m2, k, l, s3).value - v1) < 1e-8 * std::max(1.0, std::abs(v1)));
  }
  double p2 = lln_moment_fixedM(m2, 2, s1).value;
  CHECK(std::abs(lln_moment_fixedM(m2, 2, s2).value - p2) < 1e-8);
}

TEST_CASE("finite-M log-correlated kernel") {
  auto fp = SpectralMeasure::free_power(two_atoms(), 2);
  double t = 1.0, c = log_corr_constant(fp, t);
  for (double h : {1e-2, 1e-3, 1e-4}) {
    double v = height_kernel_finiteM(fp, t, t + h) + std::log(h) / (2 * M_PI * M_PI);
    CHECK(std::abs(v - c) < 1e-2);
  }
}
