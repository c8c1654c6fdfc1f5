#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "rmtp/simulate.hpp"

namespace rmtp {

enum class MomentScale { Raw, Lyapunov };

// Per-trial values of p_k for each requested k.
struct MomentSet {
  std::vector<int> ks;
  std::vector<std::vector<double>> values;  // values[index of k][trial]
  int T = 0, N = 0, M = 0;
  MomentScale scale = MomentScale::Raw;

  const std::vector<double>& of(int k) const;
};

// checkpoint < 0 selects the final log_sv, otherwise the checkpoint with that alpha.
// The Lyapunov scale divides log_sv by M (also at checkpoints).
MomentSet empirical_moments(const std::vector<ProductResult>& results, const std::vector<int>& ks,
                            MomentScale scale, double checkpoint = -1.0);
// p_k of each row of log-spectra (no shape checks).
MomentSet moments_of_rows(const std::vector<std::vector<double>>& rows, const std::vector<int>& ks);

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

// Sample mean with its standard error.
Estimate mean_estimate(const std::vector<double>& x);
// Unbiased covariance of two samples with delete-1 jackknife standard error.
Estimate covariance_jackknife(const std::vector<double>& x, const std::vector<double>& y);
// k-statistic of order 3 or 4 with jackknife standard error.
Estimate kstat_jackknife(const std::vector<double>& x, int order);

// Covariance of p_k and p_l, multiplied by M when sqrtM_scaling is set. Needs T >= 50.
Estimate covariance_estimate(const MomentSet& ms, int k, int l, bool sqrtM_scaling);
// Third or fourth cumulant of (M^{1/2}) p_k. Needs T >= 200.
Estimate cumulant_estimate(const MomentSet& ms, int k, int order, bool sqrtM_scaling);

// H_k = -(scale/(k+1)) (sum_i c_i^{k+1} - mean), c_i = lambda_i clamped to the support, where
// lambda = log_sv/M and scale = M^{1/2} in the Lyapunov scale, lambda = log_sv and scale = 1 otherwise.
MomentSet height_moments(const std::vector<ProductResult>& results, const std::vector<int>& ks,
                         std::pair<double, double> support, MomentScale scale = MomentScale::Lyapunov);

struct StatReport {
  std::string id;
  double predicted = 0.0, estimated = 0.0, std_error = 0.0, z_score = 0.0;
  bool pass = false;
};

struct NamedEstimate {
  std::string id;
  Estimate est;
};

// Matches predictions and estimates by id; pass when |z| < z_threshold.
std::vector<StatReport> compare(const std::vector<std::pair<std::string, double>>& predicted,
                                const std::vector<NamedEstimate>& estimated, double z_threshold = 3.0);
StatReport make_report(const std::string& id, double predicted, const Estimate& est, double z_threshold = 3.0);

void write_reports_csv(std::ostream& os, const std::vector<StatReport>& reports);
std::string reports_json(const std::vector<StatReport>& reports);

}  // namespace rmtp
