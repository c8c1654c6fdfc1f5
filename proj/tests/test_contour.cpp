#include <cmath>

#include "doctest.h"
#include "rmtp/contour.hpp"
#include "rmtp/errors.hpp"
#include "rmtp/predict.hpp"

using namespace rmtp;

TEST_CASE("residues on circles and stadiums") {
  auto unit = circle(Cx(0, 0), 1.0);
  CHECK(std::abs(contour_integral([](Cx u) { return 1.0 / u; }, unit).value - 1.0) < 1e-13);
  CHECK(std::abs(contour_integral([](Cx u) { return std::exp(u) * u * u; }, unit).value) < 1e-12);
  auto st = stadium(0.15);
  CHECK(std::abs(contour_integral([](Cx u) { return xi(u); }, st).value - 1.0) < 1e-10);
  CHECK(std::abs(contour_integral([](Cx u) { return 1.0 / (u - 0.3); }, st).value - 1.0) < 1e-10);
}

TEST_CASE("winding numbers") {
  auto c = discretize(stadium(0.15), 256);
  CHECK(winding_number(c, Cx(0.5, 0)) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(winding_number(c, Cx(0.0, 0)) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(winding_number(c, Cx(2.0, 0))) < 1e-9);
  auto o = discretize(stadium(0.30), 256, ContourLabel::Outer);
  for (const auto& p : c.nodes) CHECK(std::abs(winding_number(o, p) - 1.0) < 1e-6);
}

TEST_CASE("nested double integral") {
  auto r = nested_double_integral([](Cx u, Cx w) { return 1.0 / (u * w); }, stadium(0.15), stadium(0.3));
  CHECK(std::abs(r.value - 1.0) < 1e-10);
  auto s = nested_double_integral([](Cx u, Cx w) { return 1.0 / ((w - u) * (w - u)); }, stadium(0.15), stadium(0.3));
  CHECK(std::abs(s.value) < 1e-10);
}

TEST_CASE("stadium smoothness gives fast convergence") {
  QuadOptions q;
  auto r = contour_integral([](Cx u) { return xi(u) * xi(u) * u; }, stadium(0.15), q);
  CHECK(r.nodes <= 1024);
  CHECK(r.error < 1e-9);
}

TEST_CASE("zero integrals settle at the rounding level") {
  // estimates alternate around 0 at 1e-12 on every doubling while the terms are of size 1000
  auto noisy = [](int n) { return Cx((__builtin_ctz(n) % 2 ? 1.0 : -1.0) * 1e-12, 0.0); };
  CHECK_THROWS_AS(converge(noisy, QuadOptions{}), QuadratureNotConverged);
  auto q = converge([&](int n) { return QuadSample{noisy(n), 1000.0}; }, QuadOptions{});
  CHECK(std::abs(q.value) <= 1e-12);
  auto m2 = EnsembleModel::identical(SpectralMeasure::atomic({0.0, std::log(4.0)}, {0.5, 0.5}), 2, Regime::FixedM);
  CHECK(std::abs(clt_cov_fixedM(m2, 1, 3, ContourSpec{0.1, 0.2}).value) < 1e-11);
}
