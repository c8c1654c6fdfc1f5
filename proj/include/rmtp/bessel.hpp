#pragma once

#include <utility>
#include <vector>

#include "rmtp/contour.hpp"
#include "rmtp/measures.hpp"

namespace rmtp {

// Descending log-spectrum lambda_1 >= ... >= lambda_N.
struct LogSpectrum {
  std::vector<double> lambda;
  // Validates ordering; throws DomainError otherwise.
  explicit LogSpectrum(std::vector<double> values);
  int N() const { return static_cast<int>(lambda.size()); }
};

// Row parameter a replacing the entry b of rho = (N-1, ..., 0).
struct HookIndex {
  Cx a;
  int b = 0;
};

struct BesselOptions {
  int max_N = 32;
  long max_prec = 16384;
  double tie_gap = 1e-8;
};

// B(mu, lambda)/B(rho, lambda) from the determinant formula in big-float arithmetic.
// Ties in lambda are jittered by 1e-9 * i; *jittered reports whether that happened.
Cx bessel_ratio_direct(const LogSpectrum& ls, const std::vector<HookIndex>& hooks,
                       bool* jittered = nullptr, const BesselOptions& opt = {});
// Same ratio for an arbitrary N-tuple mu (pairwise distinct).
Cx bessel_ratio_tuple(const std::vector<double>& lambda, const std::vector<Cx>& mu,
                      const BesselOptions& opt = {});

// Hook Schur polynomial s_{(alpha|beta)}(x).
double hook_schur(int alpha, int beta, const std::vector<double>& x);
// Schur polynomial from Frobenius coordinates as a determinant of hook Schur polynomials.
double schur_from_hooks(const std::vector<std::pair<int, int>>& frobenius, const std::vector<double>& x);
// Bialternant det(x_i^{lambda_j + N - j}) / det(x_i^{N - j}); reference for schur_from_hooks.
double schur_bialternant(const std::vector<int>& partition, const std::vector<double>& x);

// Double contour integral factor of the single-hook formula, without the Gamma prefactor.
QuadResult bessel_contour_integral(const LogSpectrum& ls, const HookIndex& hook,
                                   const QuadOptions& quad = {});
// Gamma prefactor (-1)^{N-b} (N-b-1)! b! (a-b) / prod_{j<N} (a-j).
Cx bessel_contour_prefactor(int N, const HookIndex& hook);
Cx bessel_ratio_contour(const LogSpectrum& ls, const HookIndex& hook, const QuadOptions& quad = {});

enum class SingleHookMethod { Direct, Contour };

// k x k determinant of single-hook ratios; b's strictly decreasing, a's distinct, k <= 4.
Cx bessel_ratio_multi(const LogSpectrum& ls, const std::vector<HookIndex>& hooks,
                      SingleHookMethod method = SingleHookMethod::Contour);

// Large-N approximant for the empirical measure mu_N of the spectrum; hooks given as (a~, b~).
Cx bessel_ratio_asymptotic(const SpectralMeasure& mu_N, const std::vector<std::pair<Cx, double>>& hooks_scaled);

enum class MbgfEnsemble { Jacobi, Wishart, FixedSpectrum };

struct MbgfParams {
  int N = 1;
  double alpha = 1.0;  // Jacobi
  int R = 1;           // Jacobi
  double L = 1.0;      // Wishart
  std::vector<double> eigenvalues;  // fixed spectrum (positive)
};

double mbgf(MbgfEnsemble ensemble, const MbgfParams& p, const std::vector<double>& s);
double log_mbgf(MbgfEnsemble ensemble, const MbgfParams& p, const std::vector<double>& s);
// E[p_k] of the log-spectrum for k = 1, 2 by finite differences of log phi at rho.
double moment_via_mbgf(MbgfEnsemble ensemble, const MbgfParams& p, int k);

}  // namespace rmtp
