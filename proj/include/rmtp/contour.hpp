#pragma once

#include <functional>
#include <vector>

#include "rmtp/jet.hpp"

namespace rmtp {

// Closed curve parameterized on [0, 2pi), counterclockwise.
struct Curve {
  std::function<Cx(double)> point;
  std::function<Cx(double)> deriv;
  double phase = 0.0;
};

// Stadium at distance eps around [0,1]. Each of the four pieces is reparameterized by a
// sigmoidal map so the periodic parameterization is smooth at the joints.
Curve stadium(double eps, double phase = 0.0, int sigmoid_order = 6);
Curve circle(Cx center, double radius, double phase = 0.0);

enum class ContourLabel { Inner, Outer };

// Trapezoid nodes; weights already include z'(s) ds / (2 pi i).
struct Contour {
  std::vector<Cx> nodes;
  std::vector<Cx> weights;
  ContourLabel label = ContourLabel::Inner;
};

Contour discretize(const Curve& c, int n, ContourLabel label = ContourLabel::Inner);

// Winding number of the discretized contour about p.
double winding_number(const Contour& c, Cx p);

struct QuadOptions {
  int start_nodes = 64;
  int max_nodes = 4096;
  double rel_tol = 1e-9;
  double abs_tol = 1e-13;
};

struct QuadResult {
  Cx value;
  double error = 0.0;
  int nodes = 0;
};

// Node-doubling driver: estimate(n) returns the n-node rule. Stops when successive
// estimates agree to rel_tol |value| + abs_tol.
QuadResult converge(const std::function<Cx(int)>& estimate, const QuadOptions& opt = {});

// An n-node rule with an upper bound on sum |w_i f_i|, the scale of its rounding error.
struct QuadSample {
  Cx value;
  double magnitude = 0.0;
};
// As above, with the tolerance raised to the rounding level 64 eps * magnitude
// (integrals that cancel to zero settle there).
QuadResult converge(const std::function<QuadSample(int)>& estimate, const QuadOptions& opt = {});

// (1/2 pi i) \oint f(u) du, reusing evaluations across doublings.
QuadResult contour_integral(const std::function<Cx(Cx)>& f, const Curve& c,
                            const QuadOptions& opt = {});

// (1/2 pi i)^2 \oint_outer \oint_inner f(u, w) du dw.
QuadResult nested_double_integral(const std::function<Cx(Cx, Cx)>& f, const Curve& inner,
                                  const Curve& outer, const QuadOptions& opt = {});

}  // namespace rmtp
