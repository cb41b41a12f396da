#include "gradnet/curvature.hpp"

#include <cmath>

#include "gradnet/errors.hpp"

namespace gradnet {

double hessian_linear(const CurvaturePoint&) { return 1.0; }

double hessian_softmax(const CurvaturePoint& p) {
  if (!(p.s > 0.0)) throw DomainError("softmax hessian requires s > 0");
  const double y = std::exp(p.x) / p.s;
  return y * y - y * (p.t - y);
}

double hessian_exp(const CurvaturePoint& p) {
  const double y = std::exp(p.x);
  return y * y - y * (p.t - y);
}

double hessian_pow3(const CurvaturePoint& p) {
  const double x = p.x;
  return 9.0 * x * x * x * x - 6.0 * x * (-x * x * x + p.t);
}

double gb_second_derivative(HeadKind kind, double x, double alpha) {
  switch (kind) {
    case HeadKind::exp_gb:
      return alpha * std::exp(x);
    case HeadKind::pow3_gb:
      return 3.0 * alpha * x * x;
    case HeadKind::softmax_ce:
      return 1.0;
    default:
      throw ConfigError("gb_second_derivative is defined for exp_gb, pow3_gb and softmax_ce");
  }
}

OrderingReport first_term_ordering(std::span<const double> x_grid, double s) {
  if (!(s > 1.0)) throw DomainError("first-term ordering requires s > 1");
  if (x_grid.empty()) throw DomainError("first-term ordering requires a non-empty grid");

  OrderingReport report;
  report.s = s;
  report.points.reserve(x_grid.size());
  for (double x : x_grid) {
    OrderingPoint p;
    p.x = x;
    p.term_pow3 = 9.0 * x * x * x * x;
    p.term_exp = std::exp(2.0 * x);
    p.term_softmax = p.term_exp / (s * s);
    p.term_linear = 1.0;
    p.chain_holds = p.term_pow3 > p.term_exp && p.term_exp > p.term_softmax &&
                    p.term_softmax > p.term_linear;
    report.points.push_back(p);
  }

  // Longest run of consecutive holding points.
  std::size_t best_begin = 0, best_len = 0, run_begin = 0, run_len = 0;
  for (std::size_t i = 0; i < report.points.size(); ++i) {
    if (report.points[i].chain_holds) {
      if (run_len == 0) run_begin = i;
      ++run_len;
      if (run_len > best_len) {
        best_len = run_len;
        best_begin = run_begin;
      }
    } else {
      run_len = 0;
    }
  }
  report.hold_begin = best_begin;
  report.hold_end = best_begin + best_len;
  return report;
}

}  // namespace gradnet
