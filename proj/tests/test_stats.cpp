#include <Eigen/Dense>

#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "rmtp/errors.hpp"
#include "rmtp/rng.hpp"
#include "rmtp/stats.hpp"

using namespace rmtp;

namespace {

ProductResult row(std::vector<double> sv, int M = 4) {
  ProductResult r;
  r.N = static_cast<int>(sv.size());
  r.M = M;
  r.log_sv = std::move(sv);
  return r;
}

std::vector<ProductResult> random_rows(int T, int N, int M, std::uint64_t seed) {
  Philox r(seed, 0);
  std::vector<ProductResult> out;
  for (int t = 0; t < T; ++t) {
    std::vector<double> v(N);
    for (double& x : v) x = M * (0.5 + 0.3 * r.normal() / std::sqrt(double(M)));
    std::sort(v.rbegin(), v.rend());
    out.push_back(row(v, M));
  }
  return out;
}

}  // namespace

TEST_CASE("empirical moments") {
  auto ms = empirical_moments({row({0, 0, 0})}, {0, 1, 2}, MomentScale::Raw);
  CHECK(ms.of(0)[0] == 3.0);
  CHECK(ms.of(1)[0] == 0.0);
  auto m2 = empirical_moments({row({1, -1})}, {2}, MomentScale::Raw);
  CHECK(m2.of(2)[0] == 2.0);
  auto ly = empirical_moments({row({4, -8}, 4)}, {1}, MomentScale::Lyapunov);
  CHECK(ly.of(1)[0] == -1.0);
  CHECK_THROWS_AS(empirical_moments({row({1, 2}), row({1, 2, 3})}, {1}, MomentScale::Raw), MixedShapes);
  CHECK_THROWS_AS(empirical_moments({row({1, 2}, 4), row({1, 2}, 5)}, {1}, MomentScale::Raw), MixedShapes);
  CHECK_THROWS_AS(ms.of(5), DomainError);
}

TEST_CASE("checkpoint moments use the full-product scale") {
  ProductResult r = row({8, 4}, 8);
  r.checkpoints = {{0.5, {4, 2}}};
  auto ms = empirical_moments({r}, {1}, MomentScale::Lyapunov, 0.5);
  CHECK(ms.of(1)[0] == doctest::Approx(0.75));
  CHECK_THROWS_AS(empirical_moments({r}, {1}, MomentScale::Lyapunov, 0.25), DomainError);
}

TEST_CASE("covariance with known value and jackknife error") {
  Philox r(1, 0);
  const int T = 1000;
  std::vector<double> x(T), y(T);
  for (int i = 0; i < T; ++i) {
    double a = r.normal(), b = r.normal();
    x[i] = a;
    y[i] = 0.7 * a + std::sqrt(1 - 0.49) * b;
  }
  auto c = covariance_jackknife(x, y);
  CHECK(std::abs(c.value - 0.7) < 3 * c.std_error);
  double analytic = std::sqrt((1 + 0.49) / (T - 1.0));
  CHECK(std::abs(c.std_error / analytic - 1.0) < 0.2);
  auto k = covariance_jackknife(std::vector<double>(T, 2.0), y);
  CHECK(k.value == 0.0);
  auto m = mean_estimate(x);
  CHECK(std::abs(m.std_error * std::sqrt(double(T)) - 1.0) < 0.1);
}

TEST_CASE("k-statistics") {
  // reference values from the unbiased k-statistic formulas evaluated by hand
  std::vector<double> d{1, 2, 4, 8, 16};
  double n = 5, mean = 31.0 / 5, s2 = 0, s3 = 0, s4 = 0;
  for (double v : d) {
    s2 += std::pow(v - mean, 2);
    s3 += std::pow(v - mean, 3);
    s4 += std::pow(v - mean, 4);
  }
  double k3 = n * s3 / ((n - 1) * (n - 2));
  double k4 = (n * (n + 1) * s4 - 3 * (n - 1) * s2 * s2) / ((n - 1) * (n - 2) * (n - 3));
  CHECK(kstat_jackknife(d, 3).value == doctest::Approx(k3).epsilon(1e-12));
  CHECK(kstat_jackknife(d, 4).value == doctest::Approx(k4).epsilon(1e-12));
  CHECK_THROWS_AS(kstat_jackknife(d, 5), DomainError);

  Philox r(2, 0);
  std::vector<double> g(2000), e(2000);
  for (int i = 0; i < 2000; ++i) {
    g[i] = r.normal();
    e[i] = -std::log(r.uniform()) - 1.0;
  }
  for (int o : {3, 4}) {
    auto c = kstat_jackknife(g, o);
    CHECK(std::abs(c.value) < 3 * c.std_error);
  }
  auto c3 = kstat_jackknife(e, 3);
  CHECK(std::abs(c3.value - 2.0) < 3 * c3.std_error);
}

TEST_CASE("trial-count guards") {
  auto few = random_rows(40, 3, 16, 3);
  auto ms = empirical_moments(few, {1, 2}, MomentScale::Lyapunov);
  CHECK_THROWS_AS(covariance_estimate(ms, 1, 1, true), TooFewTrials);
  auto mid = random_rows(120, 3, 16, 3);
  auto mm = empirical_moments(mid, {1}, MomentScale::Lyapunov);
  CHECK_NOTHROW(covariance_estimate(mm, 1, 1, true));
  CHECK_THROWS_AS(cumulant_estimate(mm, 1, 3, true), TooFewTrials);
}

TEST_CASE("covariance matrix of moments is symmetric and PSD") {
  auto rows = random_rows(300, 4, 16, 4);
  auto ms = empirical_moments(rows, {1, 2, 3}, MomentScale::Lyapunov);
  Eigen::Matrix3d c;
  for (int k = 1; k <= 3; ++k)
    for (int l = 1; l <= 3; ++l) c(k - 1, l - 1) = covariance_estimate(ms, k, l, true).value;
  CHECK((c - c.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(c);
  CHECK(es.eigenvalues().minCoeff() > -1e-8);
}

TEST_CASE("height moments") {
  auto det = std::vector<ProductResult>(5, row({2.0, 1.0}, 4));
  auto h = height_moments(det, {0, 1}, {0.0, 1.0});
  for (double v : h.of(0)) CHECK(v == 0.0);

  auto rows = random_rows(200, 3, 16, 5);
  // support wide enough that nothing is clamped: H_k is a linear function of p_{k+1}
  auto hm = height_moments(rows, {0, 1, 2}, {-10.0, 10.0});
  auto pm = empirical_moments(rows, {1, 2, 3}, MomentScale::Lyapunov);
  const double sqrtM = 4.0;
  double worst = 0;
  for (int k = 0; k <= 2; ++k) {
    double mean = 0;
    for (double v : pm.of(k + 1)) mean += v / rows.size();
    for (std::size_t t = 0; t < rows.size(); ++t) {
      double want = -sqrtM / (k + 1) * (pm.of(k + 1)[t] - mean);
      worst = std::max(worst, std::abs(hm.of(k)[t] - want));
    }
  }
  CHECK(worst < 1e-12);
  auto v0 = covariance_jackknife(hm.of(0), hm.of(0)).value;
  auto vp = covariance_estimate(pm, 1, 1, true).value;
  CHECK(std::abs(v0 - vp) < 1e-12 * vp);
}

TEST_CASE("reports") {
  auto r = make_report("x", 1.0, {1.0, 0.1});
  CHECK(r.z_score == 0.0);
  CHECK(r.pass);
  auto f = make_report("x", 1.0, {1.5, 0.1});
  CHECK(f.z_score == doctest::Approx(5.0));
  CHECK_FALSE(f.pass);
  CHECK(compare({}, {}).empty());
  auto rs = compare({{"a", 0.0}, {"b", 2.0}}, {{"b", {2.1, 0.1}}, {"a", {0.0, 0.0}}}, 3.0);
  REQUIRE(rs.size() == 2);
  CHECK(rs[0].pass);
  CHECK(rs[1].pass);
  CHECK_THROWS_AS(compare({{"c", 0.0}}, {}), ConfigError);
  std::ostringstream csv;
  write_reports_csv(csv, rs);
  CHECK(csv.str().rfind("statistic,predicted,estimated,std_error,z_score,verdict\n", 0) == 0);
  auto j = reports_json({f});
  CHECK(j.find("\"verdict\": \"fail\"") != std::string::npos);
}
