#pragma once

#include <optional>
#include <span>
#include <vector>

namespace rtdcm {

/// Natural cubic smoothing spline (Reinsch form).
///
/// Minimizes  sum_i (y_i - f(x_i))^2 + lambda * integral f''(u)^2 du  over the
/// abscissa rescaled to [0, 1], so `lambda` is independent of the input units.
/// With no lambda supplied, it is chosen by generalized cross-validation.
/// lambda = 0 gives the interpolating natural cubic spline.
class SmoothingSpline {
 public:
  /// Requires >= 4 strictly increasing abscissae; throws Error otherwise.
  static SmoothingSpline fit(std::span<const double> x, std::span<const double> y,
                             std::optional<double> lambda = std::nullopt);

  double operator()(double x) const;
  std::vector<double> evaluate(std::span<const double> xs) const;

  double lambda() const { return lambda_; }
  /// Fitted values at the knots.
  const std::vector<double>& fitted() const { return values_; }

 private:
  std::vector<double> knots_;       // rescaled to [0, 1]
  std::vector<double> values_;      // f at knots
  std::vector<double> second_;      // f'' at knots (zero at both ends)
  double origin_ = 0.0;
  double scale_ = 1.0;
  double lambda_ = 0.0;
};

}  // namespace rtdcm
