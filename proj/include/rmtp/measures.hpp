#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rmtp/jet.hpp"

namespace rmtp {

using ComplexPoint = Cx;

// Probability measure on the log-eigenvalue axis.
class SpectralMeasure {
 public:
  enum class Kind { Atomic, PointMass, GinibreLimit, JacobiLimit, FreePower };

  static SpectralMeasure atomic(std::vector<double> points, std::vector<double> weights,
                                std::optional<std::pair<double, double>> interval = std::nullopt);
  static SpectralMeasure uniform_atoms(std::vector<double> points);
  static SpectralMeasure point_mass(double x0);
  static SpectralMeasure ginibre(double gamma);
  static SpectralMeasure jacobi(double alpha_hat, double R_hat);
  static SpectralMeasure free_power(const SpectralMeasure& base, int power);

  Kind kind() const { return kind_; }
  const std::vector<double>& points() const { return points_; }
  const std::vector<double>& weights() const { return weights_; }
  // e^{s_i}, cached for the transform sums.
  const std::vector<double>& exp_points() const { return exp_points_; }
  double x0() const { return a_; }
  double gamma() const { return a_; }
  double alpha_hat() const { return a_; }
  double R_hat() const { return b_; }
  const SpectralMeasure& base() const { return *base_; }
  int power() const { return power_; }
  std::pair<double, double> interval() const { return interval_; }

  bool is_named() const { return kind_ == Kind::GinibreLimit || kind_ == Kind::JacobiLimit; }
  // True when S is constant (point mass, or a free power of one).
  bool is_degenerate() const;

  // S(w) = (n0 + n1 w)/(d0 + w) for named families.
  void rational_s(double& n0, double& n1, double& d0) const;

 private:
  Kind kind_ = Kind::PointMass;
  std::vector<double> points_, weights_, exp_points_;
  double a_ = 0.0, b_ = 0.0;
  std::shared_ptr<const SpectralMeasure> base_;
  int power_ = 1;
  std::pair<double, double> interval_{0.0, 0.0};
};

struct BranchSeed {
  ComplexPoint anchor_u;
  ComplexPoint anchor_value;
};

struct MDerivs {
  Cx m, d1, d2, d3;
};

// Exponential moments int e^{k s} drho for k = 1 and k = -1.
double exp_moment(const SpectralMeasure& mu, int k);

ComplexPoint m_transform(const SpectralMeasure& mu, ComplexPoint z);
MDerivs m_derivs(const SpectralMeasure& mu, ComplexPoint z);

// z = M^{-1}(u - 1).
ComplexPoint m_inverse(const SpectralMeasure& mu, ComplexPoint u,
                       std::optional<BranchSeed> seed = std::nullopt);
// Real branch for u in (0,1): z <= 0.
double m_inverse_real(const SpectralMeasure& mu, double u);

// Taylor jet of u -> M^{-1}(u - 1), continued along a sequence of points.
class InverseBranch {
 public:
  explicit InverseBranch(const SpectralMeasure& mu, std::optional<BranchSeed> seed = std::nullopt);
  Jet at(ComplexPoint u);
  ComplexPoint last_u() const { return u_; }

 private:
  const SpectralMeasure* mu_;
  std::unique_ptr<InverseBranch> base_;
  ComplexPoint u_{0.5, 0.0}, z_{0.0, 0.0};
  bool started_ = false;
};

// Jets of z(u) at every contour node, continued around the closed curve.
std::vector<Jet> m_inverse_contour(const SpectralMeasure& mu, const std::vector<ComplexPoint>& nodes);

ComplexPoint s_transform(const SpectralMeasure& mu, ComplexPoint w,
                         std::optional<BranchSeed> seed = std::nullopt);
double s_transform_real(const SpectralMeasure& mu, double w);
// Jet of S at a real w in (-1, 0).
Jet s_jet_real(const SpectralMeasure& mu, double w);

ComplexPoint psi_tilde(const SpectralMeasure& mu, ComplexPoint c,
                       std::optional<BranchSeed> seed = std::nullopt);

// Boundary value M(e^{-t} + i0) of the measure (named family, point mass, atomic or free power).
struct BoundaryValue {
  Cx w;       // M(e^{-t} + i0)
  Cx omega;   // subordination variable (equals e^{-t} unless mu is a free power)
  Cx dw_dt;   // derivative of w along t
  Cx domega_dt;
  Cx mb_prime;  // M_base'(omega)
};
BoundaryValue boundary_value(const SpectralMeasure& mu, double t);

double density_from_boundary(const SpectralMeasure& mu, double t);
double pv_m_on_support(const SpectralMeasure& mu, double t);
ComplexPoint subordination_boundary(const SpectralMeasure& mu_i, const SpectralMeasure& mu_prod,
                                    double t, int sign);

// Support of the measure on the log axis.
std::pair<double, double> support(const SpectralMeasure& mu);

// Integral of f over the support against the density, for measures with a density;
// nodes placed by a cosine map so that square-root edges are resolved.
double integrate_density(const SpectralMeasure& mu, const std::function<double(double)>& f,
                         int nodes = 2000);

}  // namespace rmtp
