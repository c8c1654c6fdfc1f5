#pragma once

#include <string>
#include <utility>
#include <vector>

#include "rmtp/contour.hpp"
#include "rmtp/measures.hpp"

namespace rmtp {

enum class Regime { FixedM, Lyapunov };

// Factor measures of a product with their CLT data Psi and Lambda.
// Named families use the ensemble data (Lambda = 0); every other measure is treated as a
// fixed-spectrum factor.
class EnsembleModel {
 public:
  static EnsembleModel identical(const SpectralMeasure& mu, int M, Regime regime);
  static EnsembleModel factor_list(const std::vector<SpectralMeasure>& factors);

  const SpectralMeasure& factor_measure() const { return groups_.front().first; }
  const std::vector<std::pair<SpectralMeasure, int>>& groups() const { return groups_; }
  int M() const;
  Regime regime() const { return regime_; }
  // True when every factor is a point mass: all fluctuation predictions vanish.
  bool degenerate() const;

  // Psi(u) = -log S(u - 1) summed over factors (one factor in the Lyapunov regime).
  Cx psi(Cx u) const;
  Cx lambda2(Cx u, Cx w) const;

 private:
  std::vector<std::pair<SpectralMeasure, int>> groups_;
  Regime regime_ = Regime::FixedM;
};

Cx xi(Cx u);

struct ContourSpec {
  double eps_inner = 0.15;
  double eps_outer = 0.30;
  double phase = 0.0;
  QuadOptions quad{};
};

struct Prediction {
  std::string statistic;
  int k = 0, l = 0;
  double value = 0.0;
  double imag_residue = 0.0;
  double quadrature_error = 0.0;
  int nodes = 0;
  ContourSpec contour;
};

Prediction lln_moment_fixedM(const EnsembleModel& model, int k, const ContourSpec& spec = {});
Prediction clt_cov_fixedM(const EnsembleModel& model, int k, int l, const ContourSpec& spec = {});
Prediction lln_moment_lyapunov(const EnsembleModel& model, int k, const ContourSpec& spec = {});
Prediction clt_cov_lyapunov(const EnsembleModel& model, int k, int l, const ContourSpec& spec = {});
// Covariance of M^{1/2} p_k at fraction alpha with M^{1/2} p_l at fraction beta, beta <= alpha.
Prediction cov_2d(const EnsembleModel& model, int k, double alpha, int l, double beta,
                  const ContourSpec& spec = {});

struct KernelValue {
  double smooth = 0.0;
  double delta_coeff = 0.0;
};

// Support [-log S(-1), -log S(0)] of the Lyapunov exponent density.
std::pair<double, double> lyapunov_support(const SpectralMeasure& mu);
double lyapunov_density(const SpectralMeasure& mu, double z);
KernelValue lyapunov_kernel(const SpectralMeasure& mu, double t, double s);
KernelValue kernel_2d(const SpectralMeasure& mu, double t, double alpha, double s, double beta);

// Fixed-M height-function covariance of the product of M copies of mu (given as FreePower).
double height_kernel_finiteM(const SpectralMeasure& product, double t, double s);
double log_corr_constant(const SpectralMeasure& product, double t);

}  // namespace rmtp
