#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "rtdcm/curve_geometry.hpp"
#include "rtdcm/rod_model.hpp"

namespace rtdcm {

inline const double kGoldenRatio = 0.6180339887498949;  // (sqrt(5) - 1) / 2

struct GoldenSearchSpec {
  double lo = 0.0;
  double hi = 1.0;
  double tol = 1e-6;
  /// Grid step; when set, f is only evaluated at lo + k * quantize.
  std::optional<double> quantize;
  std::size_t max_evals = 200;
  /// Evaluated before the bracket so the result is never worse than this point.
  std::optional<double> entry;

  /// Throws InvalidBracket.
  void validate() const;
};

struct SearchEval {
  double x = 0.0;
  double f = 0.0;
};

struct SearchTrace {
  std::vector<SearchEval> evals;  // in evaluation order, each x at most once
  double best_x = 0.0;
  double best_f = 0.0;
  /// Bracket [a, b] before the first and after every golden iteration.
  std::vector<std::pair<double, double>> brackets;
  bool converged = false;
  bool budget_exceeded = false;
};

/// Golden-section minimization on [lo, hi].
///
/// Interior points at lo + (1 - rho) W and lo + rho W; the bracket shrinks by
/// rho per iteration until its width is at most tol. With quantization, x is
/// rounded to the grid before evaluation, results are memoized, and the
/// search finishes with a scan of the grid points around the final bracket.
/// Exhausting max_evals returns the best point so far with budget_exceeded set.
SearchTrace golden_section(const std::function<double(double)>& f, const GoldenSearchSpec& spec);

/// Root-mean-square distance between corresponding centers i_lo..i_hi
/// (inclusive), in cm. Throws IndexRangeInvalid or DimensionMismatch.
double rmse_shape(const std::vector<Vec3>& a, const std::vector<Vec3>& b, int i_lo, int i_hi);
double rmse_shape(const Shape& a, const Shape& b, int i_lo, int i_hi);

inline constexpr std::size_t kCurvatureGridPoints = 200;

/// RMSE of the curvature channels on a common 200-point grid over the
/// overlapping arc range, in 1/cm. Throws EmptyOverlap.
double rmse_curvature(const CTProfile& a, const CTProfile& b);

/// Distance between the last centers (the tip disk), in mm.
double tip_error(const std::vector<Vec3>& a, const std::vector<Vec3>& b);
double tip_error(const Shape& a, const Shape& b);

}  // namespace rtdcm
