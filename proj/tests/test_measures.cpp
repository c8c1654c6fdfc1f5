#include <cmath>
#include <vector>

#include "doctest.h"
#include "rmtp/errors.hpp"
#include "rmtp/measures.hpp"

using namespace rmtp;

namespace {

SpectralMeasure two_atoms() { return SpectralMeasure::atomic({0.0, std::log(4.0)}, {0.5, 0.5}); }

std::vector<double> grid(double a, double b, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(a + (b - a) * i / (n - 1));
  return v;
}

// Log-eigenvalue density of the Marchenko-Pastur law with mean gamma.
double mp_log_density(double gamma, double t) {
  double a = std::pow(std::sqrt(gamma) - 1, 2), b = std::pow(std::sqrt(gamma) + 1, 2), x = std::exp(t);
  if (x <= a || x >= b) return 0.0;
  return std::sqrt((b - x) * (x - a)) / (2 * M_PI);
}

}  // namespace

TEST_CASE("construction validates parameters") {
  CHECK_THROWS_AS(SpectralMeasure::ginibre(1.0), DomainError);
  CHECK_THROWS_AS(SpectralMeasure::jacobi(0.0, 1.0), DomainError);
  CHECK_THROWS_AS(SpectralMeasure::atomic({0.0}, {-1.0}), DomainError);
  CHECK_THROWS_AS(SpectralMeasure::free_power(SpectralMeasure::free_power(two_atoms(), 2), 2), DomainError);
  CHECK_THROWS_AS(SpectralMeasure::atomic({0.0, 1.0}, {2.0, 6.0}), DomainError);
  auto mu = SpectralMeasure::atomic({0.0, 1.0}, {0.25, 0.75});
  CHECK(mu.weights()[1] == 0.75);
}

TEST_CASE("m_transform examples") {
  CHECK(std::abs(m_transform(SpectralMeasure::point_mass(0.0), Cx(0.5, 0)) - Cx(1.0, 0)) < 1e-14);
  CHECK(std::abs(m_transform(two_atoms(), Cx(-1.0, 0)) - Cx(-0.65, 0)) < 1e-14);
  CHECK(std::abs(m_transform(two_atoms(), Cx(0.0, 0))) < 1e-15);
  CHECK_THROWS_AS(m_transform(two_atoms(), Cx(0.25, 0)), PoleHit);
}

TEST_CASE("M is in (-1,0) and increasing on the negative axis") {
  for (const auto& mu : {two_atoms(), SpectralMeasure::ginibre(2.0), SpectralMeasure::jacobi(1.0, 1.5)}) {
    double prev = -1.0;
    for (double z : grid(-50.0, -0.01, 60)) {
      double m = m_transform(mu, Cx(z, 0)).real();
      CHECK(m > -1.0);
      CHECK(m < 0.0);
      CHECK(m > prev);
      prev = m;
    }
  }
}

TEST_CASE("m_inverse examples and branch") {
  CHECK(std::abs(m_inverse(SpectralMeasure::point_mass(0.0), Cx(0.5, 0)) - Cx(-1.0, 0)) < 1e-12);
  CHECK(std::abs(m_inverse(SpectralMeasure::ginibre(2.0), Cx(0.5, 0)) - Cx(-2.0 / 3.0, 0)) < 1e-12);
  auto mu = two_atoms();
  // zero at u = 1, pole at u = 0
  CHECK(std::abs(m_inverse_real(mu, 1.0 - 1e-9)) < 1e-6);
  CHECK(m_inverse_real(mu, 1e-6) < -1e4);
  for (double u : grid(0.05, 0.95, 10)) CHECK(m_inverse_real(mu, u) <= 0.0);
}

TEST_CASE("round trip on a contour around [0,1]") {
  std::vector<double> pts;
  for (int i = 0; i < 8; ++i) pts.push_back(i / 7.0);
  for (const auto& mu : {two_atoms(), SpectralMeasure::uniform_atoms(pts), SpectralMeasure::ginibre(2.0)}) {
    std::vector<Cx> nodes;
    for (int j = 0; j < 64; ++j) nodes.push_back(Cx(0.5, 0) + 0.7 * std::polar(1.0, 2 * M_PI * (j + 0.5) / 64));
    auto jets = m_inverse_contour(mu, nodes);
    double worst = 0;
    for (std::size_t j = 0; j < nodes.size(); ++j)
      worst = std::max(worst, std::abs(m_transform(mu, jets[j].val()) - (nodes[j] - 1.0)));
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("S-transform closed forms and endpoints") {
  CHECK(std::abs(s_transform(SpectralMeasure::point_mass(0.0), Cx(-0.3, 0)) - 1.0) < 1e-12);
  CHECK(s_transform_real(SpectralMeasure::ginibre(2.0), 0.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(s_transform_real(SpectralMeasure::jacobi(1.0, 1.0), 0.0) == doctest::Approx(1.5).epsilon(1e-12));
  auto mu = SpectralMeasure::atomic({-0.4, 0.1, 0.9}, {0.2, 0.5, 0.3});
  double ep = 0, em = 0;
  for (int i = 0; i < 3; ++i) {
    ep += mu.weights()[i] * std::exp(mu.points()[i]);
    em += mu.weights()[i] * std::exp(-mu.points()[i]);
  }
  CHECK(std::abs(s_transform_real(mu, 0.0) * ep - 1.0) < 1e-10);
  CHECK(std::abs(s_transform_real(mu, -1.0) - em) < 1e-10);
  double prev = INFINITY;
  for (double w : grid(-1.0, 0.0, 21)) {
    double s = s_transform_real(mu, w);
    CHECK(s > 0.0);
    CHECK(s < prev);
    prev = s;
  }
}

TEST_CASE("S-transform is multiplicative over free powers") {
  for (const auto& base : {two_atoms(), SpectralMeasure::ginibre(2.0), SpectralMeasure::jacobi(1.0, 2.0)}) {
    auto p = SpectralMeasure::free_power(base, 3);
    for (double w : grid(-0.95, -0.05, 10)) {
      double sb = s_transform_real(base, w);
      CHECK(std::abs(s_transform_real(p, w) - sb * sb * sb) < 1e-10 * sb * sb * sb);
      Cx wc(w, 0.05);
      Cx sc = s_transform(base, wc);
      CHECK(std::abs(s_transform(p, wc) - sc * sc * sc) < 1e-10 * std::abs(sc * sc * sc));
    }
  }
}

TEST_CASE("psi_tilde examples") {
  auto pm = SpectralMeasure::atomic({0.0}, {1.0});
  CHECK(std::abs(psi_tilde(pm, Cx(0.5, 0))) < 1e-10);
  auto mu = SpectralMeasure::atomic({-0.4, 0.1, 0.9}, {0.2, 0.5, 0.3});
  double mean = -0.4 * 0.2 + 0.1 * 0.5 + 0.9 * 0.3;
  CHECK(std::abs(psi_tilde(mu, Cx(1e-7, 0)) - mean) < 1e-5);
  // derivative identity: d/dc psi_tilde = log S(c - 1) + ... checked through the defining integral
  double c = 0.5;
  Cx z = m_inverse(mu, Cx(c, 0));
  Cx direct = c * std::log(s_transform(mu, Cx(c - 1, 0)));
  for (int i = 0; i < 3; ++i) direct += mu.weights()[i] * std::log((1 - c) * (-1.0 / z + std::exp(mu.points()[i])));
  CHECK(std::abs(psi_tilde(mu, Cx(c, 0)) - direct) < 1e-10);
}

TEST_CASE("Marchenko-Pastur density from boundary values") {
  auto g = SpectralMeasure::ginibre(2.0);
  auto p1 = SpectralMeasure::free_power(g, 1);
  CHECK(density_from_boundary(p1, std::log(2.0)) == doctest::Approx(std::sqrt(7.0) / (2 * M_PI)).epsilon(1e-8));
  auto [a, b] = support(p1);
  double worst = 0;
  for (int i = 0; i < 50; ++i) {
    double t = a + (b - a) * (i + 0.5) / 50;
    worst = std::max(worst, std::abs(density_from_boundary(p1, t) - mp_log_density(2.0, t)));
  }
  CHECK(worst < 1e-6);
  CHECK(density_from_boundary(p1, b + 1.0) == 0.0);
  CHECK(integrate_density(p1, [](double) { return 1.0; }) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("free power density is normalized and nonnegative") {
  auto p = SpectralMeasure::free_power(two_atoms(), 2);
  CHECK(integrate_density(p, [](double) { return 1.0; }) == doctest::Approx(1.0).epsilon(1e-6));
  auto [a, b] = support(p);
  for (int i = 0; i < 40; ++i) CHECK(density_from_boundary(p, a + (b - a) * (i + 0.5) / 40) >= -1e-12);
  // first moment of the product is the sum of factor first moments
  CHECK(integrate_density(p, [](double t) { return t; }) == doctest::Approx(2 * std::log(2.0)).epsilon(1e-6));
}

TEST_CASE("subordination and principal value") {
  auto g = SpectralMeasure::ginibre(2.0);
  auto p1 = SpectralMeasure::free_power(g, 1);
  double t = 0.3;
  Cx om = subordination_boundary(g, p1, t, +1);
  CHECK(std::abs(om - std::exp(-t)) < 1e-8);
  Cx omc = subordination_boundary(g, SpectralMeasure::free_power(g, 2), 0.5, -1);
  Cx omp = subordination_boundary(g, SpectralMeasure::free_power(g, 2), 0.5, +1);
  CHECK(std::abs(omc - std::conj(omp)) < 1e-10);
  // outside the support the principal value is the plain transform
  auto [a, b] = support(p1);
  double tout = b + 0.5;
  CHECK(std::abs(pv_m_on_support(p1, tout) - m_transform(g, Cx(std::exp(-tout), 0)).real()) < 1e-9);
}
