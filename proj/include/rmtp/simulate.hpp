#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "rmtp/measures.hpp"
#include "rmtp/rng.hpp"

namespace rmtp {

using CMatrix = Eigen::MatrixXcd;

// Model for one factor Y (N x N); the spectrum of Y*Y is fixed, Jacobi (MANOVA) or Wishart.
struct FactorSpec {
  enum class Kind { FixedSpectrum, Jacobi, Ginibre };
  Kind kind = Kind::FixedSpectrum;
  int N = 1;
  std::vector<double> lambda;  // log-eigenvalues of Y*Y, fixed spectrum only
  int alpha = 1, R = 1;        // Jacobi
  int L = 1;                   // Ginibre

  static FactorSpec fixed(std::vector<double> log_eigs);
  static FactorSpec jacobi(int N, int alpha, int R);
  static FactorSpec ginibre(int N, int L);
  void validate() const;
};

// Limit measure of the factor's log-spectrum as N grows with the same ratios.
SpectralMeasure limit_measure(const FactorSpec& spec);

// lambda_i = F^{-1}((N - i + 1/2)/N), descending.
std::vector<double> quantile_spectrum(const SpectralMeasure& mu, int N);

CMatrix sample_haar_unitary(int N, Philox& rng);
CMatrix sample_ginibre(int L, int N, Philox& rng);
// Eigenvalues of Y*Y for one draw, descending.
std::vector<double> sample_factor_eigs(const FactorSpec& spec, Philox& rng);
// Y = diag(sqrt(eigs)) U with U Haar.
CMatrix sample_factor(const FactorSpec& spec, Philox& rng);

enum class Backend { Direct, BigFloat, Qr };
const char* backend_name(Backend b);
Backend parse_backend(const std::string& s);

struct ProductResult {
  std::vector<double> log_sv;  // log of the eigenvalues of B*B, descending
  std::vector<double> qr_diag_logs;
  std::vector<std::pair<double, std::vector<double>>> checkpoints;
  Backend backend = Backend::Direct;
  int precision_bits = 53;
  int N = 0, M = 0;
  std::uint64_t seed = 0, stream = 0;
};

// B = Y_M ... Y_1; checkpoints record log_sv after floor(alpha M) factors.
ProductResult product_log_singvals(const FactorSpec& spec, int M, Backend backend,
                                   const std::vector<double>& checkpoints, Philox& rng);

// Squared singular values (as logs, descending) of a double matrix by one-sided Jacobi on columns.
template <class Real>
std::vector<double> jacobi_log_sv2(const Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>& a);

// 2 log R_kk of the Cholesky factor of X = Y*Y for one draw.
std::vector<double> cholesky_diag_logs(const FactorSpec& spec, Philox& rng);
std::vector<double> qr_diag_logs(const CMatrix& y);

// M^{-1/2}(X - E X) for X = sum_m U_m diag(mu) U_m^*.
CMatrix additive_sum_sample(const std::vector<double>& mu, int M, Philox& rng);

struct TrialPlan {
  FactorSpec spec;
  int M = 1;
  Backend backend = Backend::BigFloat;
  std::vector<double> checkpoints;
  std::uint64_t seed = 0;
  int trials = 1;
  int threads = 1;
};

// Trial t uses the stream (seed, t); results are ordered by t independent of threads.
std::vector<ProductResult> run_trials(const TrialPlan& plan, int first = 0,
                                      const std::vector<ProductResult>* done = nullptr);

// CSV: seed,stream,backend,M,N,sv1..svN[,cp<alpha>_sv1..][,qr1..].
void write_trials_csv(std::ostream& os, const std::vector<ProductResult>& rows);
std::vector<ProductResult> read_trials_csv(std::istream& is);

// Binary checkpoint: "RMTP1", uint32 version, header, then fixed-size trial records.
struct CheckpointHeader {
  std::uint32_t version = 1;
  std::int32_t N = 0, M = 0;
  std::int32_t backend = 0;
  std::uint64_t seed = 0;
  std::vector<double> alphas;
  bool has_qr = false;
};
void write_checkpoint(const std::string& path, const CheckpointHeader& h, const std::vector<ProductResult>& rows);
std::vector<ProductResult> read_checkpoint(const std::string& path, CheckpointHeader& h);

}  // namespace rmtp
