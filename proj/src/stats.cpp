#include "rmtp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "json.hpp"
#include "rmtp/errors.hpp"
#include "rmtp/simd.hpp"

namespace rmtp {

namespace {

std::vector<double> scaled(const std::vector<double>& x, double f) {
  std::vector<double> y(x);
  for (double& v : y) v *= f;
  return y;
}

void check_shapes(const std::vector<ProductResult>& results) {
  if (results.empty()) throw TooFewTrials("no trials");
  for (const auto& r : results)
    if (r.N != results.front().N || r.M != results.front().M || r.log_sv.size() != results.front().log_sv.size())
      throw MixedShapes("trials differ in N or M");
}

const std::vector<double>& row_of(const ProductResult& r, double checkpoint) {
  if (checkpoint < 0) return r.log_sv;
  for (const auto& cp : r.checkpoints)
    if (std::abs(cp.first - checkpoint) < 1e-12) return cp.second;
  throw DomainError("trial has no checkpoint at alpha = " + std::to_string(checkpoint));
}

// k-statistic of order 3 or 4 from central power sums.
double kstat(const std::vector<double>& x, int order) {
  double n = static_cast<double>(x.size()), mean = 0.0;
  for (double v : x) mean += v / n;
  double s2 = 0.0, s3 = 0.0, s4 = 0.0;
  for (double v : x) {
    double d = v - mean;
    s2 += d * d;
    s3 += d * d * d;
    s4 += d * d * d * d;
  }
  if (order == 3) return n * s3 / ((n - 1) * (n - 2));
  return (n * (n + 1) * s4 - 3 * (n - 1) * s2 * s2) / ((n - 1) * (n - 2) * (n - 3));
}

}  // namespace

const std::vector<double>& MomentSet::of(int k) const {
  for (std::size_t i = 0; i < ks.size(); ++i)
    if (ks[i] == k) return values[i];
  throw DomainError("moment p_" + std::to_string(k) + " was not computed");
}

MomentSet moments_of_rows(const std::vector<std::vector<double>>& rows, const std::vector<int>& ks) {
  MomentSet ms;
  ms.ks = ks;
  ms.T = static_cast<int>(rows.size());
  ms.N = rows.empty() ? 0 : static_cast<int>(rows.front().size());
  int kmax = 0;
  for (int k : ks) {
    if (k < 0) throw DomainError("moment index must be >= 0");
    kmax = std::max(kmax, k);
  }
  ms.values.assign(ks.size(), std::vector<double>(rows.size()));
  std::vector<double> sums(kmax + 1);
  for (std::size_t t = 0; t < rows.size(); ++t) {
    simd::power_sums(rows[t].data(), rows[t].size(), kmax, sums.data());
    for (std::size_t i = 0; i < ks.size(); ++i) ms.values[i][t] = sums[ks[i]];
  }
  return ms;
}

MomentSet empirical_moments(const std::vector<ProductResult>& results, const std::vector<int>& ks,
                            MomentScale scale, double checkpoint) {
  check_shapes(results);
  std::vector<std::vector<double>> rows;
  double f = scale == MomentScale::Lyapunov ? 1.0 / results.front().M : 1.0;
  for (const auto& r : results) rows.push_back(scaled(row_of(r, checkpoint), f));
  MomentSet ms = moments_of_rows(rows, ks);
  ms.M = results.front().M;
  ms.scale = scale;
  return ms;
}

Estimate mean_estimate(const std::vector<double>& x) {
  double n = static_cast<double>(x.size());
  if (x.size() < 2) throw TooFewTrials("mean needs at least 2 samples");
  double m = 0.0;
  for (double v : x) m += v / n;
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return {m, std::sqrt(ss / (n - 1) / n)};
}

Estimate covariance_jackknife(const std::vector<double>& x, const std::vector<double>& y) {
  std::size_t T = x.size();
  if (T != y.size()) throw MixedShapes("covariance samples differ in length");
  if (T < 3) throw TooFewTrials("covariance needs at least 3 samples");
  // shift by the first sample to limit cancellation in the running sums
  double x0 = x[0], y0 = y[0];
  double sx = 0.0, sy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < T; ++i) {
    double a = x[i] - x0, b = y[i] - y0;
    sx += a;
    sy += b;
    sxy += a * b;
  }
  double n = static_cast<double>(T);
  double full = (sxy - sx * sy / n) / (n - 1);
  std::vector<double> loo(T);
  double mean_loo = 0.0;
  for (std::size_t i = 0; i < T; ++i) {
    double a = x[i] - x0, b = y[i] - y0;
    double m = n - 1;
    loo[i] = ((sxy - a * b) - (sx - a) * (sy - b) / m) / (m - 1);
    mean_loo += loo[i] / n;
  }
  double var = 0.0;
  for (double v : loo) var += (v - mean_loo) * (v - mean_loo);
  return {full, std::sqrt(var * (n - 1) / n)};
}

Estimate kstat_jackknife(const std::vector<double>& x, int order) {
  if (order != 3 && order != 4) throw DomainError("cumulant order must be 3 or 4");
  std::size_t T = x.size();
  if (T < 5) throw TooFewTrials("cumulant needs at least 5 samples");
  double n = static_cast<double>(T);
  double full = kstat(x, order);
  std::vector<double> rest(T - 1), loo(T);
  double mean_loo = 0.0;
  for (std::size_t i = 0; i < T; ++i) {
    std::size_t k = 0;
    for (std::size_t j = 0; j < T; ++j)
      if (j != i) rest[k++] = x[j];
    loo[i] = kstat(rest, order);
    mean_loo += loo[i] / n;
  }
  double var = 0.0;
  for (double v : loo) var += (v - mean_loo) * (v - mean_loo);
  return {full, std::sqrt(var * (n - 1) / n)};
}

Estimate covariance_estimate(const MomentSet& ms, int k, int l, bool sqrtM_scaling) {
  if (ms.T < 50) throw TooFewTrials("covariance needs T >= 50 (have " + std::to_string(ms.T) + ")");
  double f = sqrtM_scaling ? std::sqrt(static_cast<double>(ms.M)) : 1.0;
  return covariance_jackknife(scaled(ms.of(k), f), scaled(ms.of(l), f));
}

Estimate cumulant_estimate(const MomentSet& ms, int k, int order, bool sqrtM_scaling) {
  if (ms.T < 200) throw TooFewTrials("cumulants need T >= 200 (have " + std::to_string(ms.T) + ")");
  double f = sqrtM_scaling ? std::sqrt(static_cast<double>(ms.M)) : 1.0;
  return kstat_jackknife(scaled(ms.of(k), f), order);
}

MomentSet height_moments(const std::vector<ProductResult>& results, const std::vector<int>& ks,
                         std::pair<double, double> support, MomentScale scale) {
  check_shapes(results);
  auto [a, b] = support;
  if (!(a <= b)) throw DomainError("support must satisfy a <= b");
  double M = results.front().M;
  double div = scale == MomentScale::Lyapunov ? M : 1.0;
  double amp = scale == MomentScale::Lyapunov ? std::sqrt(M) : 1.0;
  MomentSet ms;
  ms.ks = ks;
  ms.T = static_cast<int>(results.size());
  ms.N = results.front().N;
  ms.M = results.front().M;
  ms.scale = scale;
  for (int k : ks) {
    if (k < 0) throw DomainError("height moments need k >= 0");
    // integral over [a, b] of #{lambda_i <= t} t^k = sum_i (b^{k+1} - c_i^{k+1})/(k+1)
    std::vector<double> raw;
    for (const auto& r : results) {
      double s = 0.0;
      for (double v : r.log_sv) s += std::pow(std::clamp(v / div, a, b), k + 1);
      raw.push_back(s);
    }
    double mean = 0.0;
    for (double v : raw) mean += v / raw.size();
    for (double& v : raw) v = -amp / (k + 1) * (v - mean);
    ms.values.push_back(std::move(raw));
  }
  return ms;
}

StatReport make_report(const std::string& id, double predicted, const Estimate& est, double z_threshold) {
  StatReport r;
  r.id = id;
  r.predicted = predicted;
  r.estimated = est.value;
  r.std_error = est.std_error;
  double diff = est.value - predicted;
  if (est.std_error > 0.0)
    r.z_score = diff / est.std_error;
  else
    r.z_score = diff == 0.0 ? 0.0 : std::copysign(INFINITY, diff);
  r.pass = std::abs(r.z_score) < z_threshold;
  return r;
}

std::vector<StatReport> compare(const std::vector<std::pair<std::string, double>>& predicted,
                                const std::vector<NamedEstimate>& estimated, double z_threshold) {
  std::vector<StatReport> out;
  for (const auto& [id, value] : predicted) {
    auto it = std::find_if(estimated.begin(), estimated.end(), [&](const NamedEstimate& e) { return e.id == id; });
    if (it == estimated.end()) throw ConfigError("no estimate for prediction '" + id + "'");
    out.push_back(make_report(id, value, it->est, z_threshold));
  }
  return out;
}

void write_reports_csv(std::ostream& os, const std::vector<StatReport>& reports) {
  os << "statistic,predicted,estimated,std_error,z_score,verdict\n";
  char buf[256];
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof buf, "%s,%.12g,%.12g,%.6g,%.4f,%s\n", r.id.c_str(), r.predicted, r.estimated,
                  r.std_error, r.z_score, r.pass ? "pass" : "fail");
    os << buf;
  }
}

std::string reports_json(const std::vector<StatReport>& reports) {
  nlohmann::json j;
  j["schema"] = "rmtp.report/1";
  j["reports"] = nlohmann::json::array();
  for (const auto& r : reports)
    j["reports"].push_back({{"statistic", r.id},
                            {"predicted", r.predicted},
                            {"estimated", r.estimated},
                            {"std_error", r.std_error},
                            {"z_score", std::isfinite(r.z_score) ? nlohmann::json(r.z_score) : nlohmann::json(nullptr)},
                            {"verdict", r.pass ? "pass" : "fail"}});
  return j.dump(2);
}

}  // namespace rmtp
