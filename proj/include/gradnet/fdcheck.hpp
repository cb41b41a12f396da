#pragma once

#include <cmath>
#include <functional>
#include <span>

namespace gradnet {

// Central finite differences and the error metric shared by the gradient
// checker, the curvature verification and the test suites.

inline double central_diff(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double central_second_diff(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

// |a - b| normalized by the overall scale of the two vectors (infinity
// norm, floored). Tiny components are thereby compared absolutely at the
// gradient's own scale instead of blowing up a 0/0 ratio.
inline double max_grad_err(std::span<const double> analytic, std::span<const double> numeric,
                           double scale_floor = 1e-8) {
  double scale = scale_floor;
  for (double v : analytic) scale = std::max(scale, std::fabs(v));
  for (double v : numeric) scale = std::max(scale, std::fabs(v));
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    worst = std::max(worst, std::fabs(analytic[i] - numeric[i]) / scale);
  }
  return worst;
}

// Scalar variant: relative where the values are large, absolute against
// `scale_floor` where both are small.
inline double scalar_err(double analytic, double numeric, double scale_floor = 1.0) {
  const double scale = std::max({std::fabs(analytic), std::fabs(numeric), scale_floor});
  return std::fabs(analytic - numeric) / scale;
}

}  // namespace gradnet
