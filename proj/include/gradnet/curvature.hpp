#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gradnet/heads.hpp"

namespace gradnet {

// Single-output second-derivative analysis of the squared error
// E(x) = (1/2)(f(x) - t)^2 for the four output activations, with the
// softmax written as f(x) = e^x / s and s treated as a constant.
struct CurvaturePoint {
  double x = 0.0;  // logit
  double t = 0.0;  // target
  double s = 1.0;  // softmax normalization proxy, must be > 0
};

// d2E/dx2 for f(x) = x: identically 1.
double hessian_linear(const CurvaturePoint& p);

// d2E/dx2 for f(x) = e^x / s (s constant):  e^{2x}/s^2 - (e^x/s)(t - e^x/s).
double hessian_softmax(const CurvaturePoint& p);

// d2E/dx2 for f(x) = e^x:  e^{2x} - e^x (t - e^x).
double hessian_exp(const CurvaturePoint& p);

// d2E/dx2 for f(x) = x^3:  9x^4 - 6x(-x^3 + t).
double hessian_pow3(const CurvaturePoint& p);

// Derivative of the imposed head delta with respect to the logit:
// exp_gb -> alpha * e^x, pow3_gb -> 3 * alpha * x^2, softmax_ce -> 1.
// Note the boosted kinds keep the alpha factor of the implemented delta.
double gb_second_derivative(HeadKind kind, double x, double alpha);

// Evaluation of the four leading Hessian terms 9x^4, e^{2x}, e^{2x}/s^2, 1
// at one grid point, and whether the strict chain
//   9x^4 > e^{2x} > e^{2x}/s^2 > 1
// holds there. The chain is a local statement: it fails both for small x
// (e^{2x}/s^2 < 1 when x < ln s) and for large x (e^{2x} outgrows 9x^4
// past x ~ 3.26), so the report returns per-point evidence instead of
// asserting a universal ordering.
struct OrderingPoint {
  double x = 0.0;
  double term_pow3 = 0.0;     // 9x^4
  double term_exp = 0.0;      // e^{2x}
  double term_softmax = 0.0;  // e^{2x}/s^2
  double term_linear = 1.0;   // 1
  bool chain_holds = false;
};

struct OrderingReport {
  double s = 0.0;
  std::vector<OrderingPoint> points;
  // Maximal contiguous run of grid points where the chain holds, as a
  // half-open index range [begin, end); empty when it never holds.
  std::size_t hold_begin = 0;
  std::size_t hold_end = 0;

  bool holds_everywhere() const { return hold_begin == 0 && hold_end == points.size(); }
};

// Evaluates the chain on a grid. Requires s > 1 (DomainError otherwise)
// and a non-empty grid.
OrderingReport first_term_ordering(std::span<const double> x_grid, double s);

}  // namespace gradnet
