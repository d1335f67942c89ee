#include "rtdcm/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "rtdcm/error.hpp"

namespace rtdcm {

void GoldenSearchSpec::validate() const {
  if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi)) {
    throw Error(ErrorCode::InvalidBracket, "golden section: need finite lo < hi");
  }
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidBracket, "golden section: tol must be > 0");
  if (quantize && !(*quantize > 0.0 && *quantize <= hi - lo)) {
    throw Error(ErrorCode::InvalidBracket, "golden section: quantize must lie in (0, hi - lo]");
  }
  if (max_evals < 1) throw Error(ErrorCode::InvalidBracket, "golden section: max_evals must be >= 1");
  if (entry && !(*entry >= lo && *entry <= hi)) {
    throw Error(ErrorCode::InvalidBracket, "golden section: entry point outside the bracket");
  }
}

namespace {

struct BudgetExhausted {};

class Evaluator {
 public:
  Evaluator(const std::function<double(double)>& f, const GoldenSearchSpec& spec, SearchTrace& trace)
      : f_(f), spec_(spec), trace_(trace) {}

  double snap(double x) const {
    if (!spec_.quantize) return x;
    const double q = *spec_.quantize;
    double g = spec_.lo + std::round((x - spec_.lo) / q) * q;
    if (g > spec_.hi + 1e-12 * q) g -= q;
    return std::clamp(g, spec_.lo, spec_.hi);
  }

  double operator()(double x) {
    x = snap(x);
    if (const auto it = seen_.find(x); it != seen_.end()) return it->second;
    if (trace_.evals.size() >= spec_.max_evals) throw BudgetExhausted{};
    const double fx = f_(x);
    seen_.emplace(x, fx);
    trace_.evals.push_back({x, fx});
    // Ties keep the earlier point, so the entry point wins on flat objectives.
    if (trace_.evals.size() == 1 || fx < trace_.best_f) {
      trace_.best_x = x;
      trace_.best_f = fx;
    }
    return fx;
  }

 private:
  const std::function<double(double)>& f_;
  const GoldenSearchSpec& spec_;
  SearchTrace& trace_;
  std::map<double, double> seen_;
};

}  // namespace

SearchTrace golden_section(const std::function<double(double)>& f, const GoldenSearchSpec& spec) {
  spec.validate();
  SearchTrace trace;
  Evaluator eval(f, spec, trace);
  const double rho = kGoldenRatio;
  const double width_stop = std::max(spec.tol, spec.quantize.value_or(0.0));

  try {
    if (spec.entry) eval(*spec.entry);
    double a = spec.lo;
    double b = spec.hi;
    double c = b - rho * (b - a);
    double e = a + rho * (b - a);
    double fc = eval(c);
    double fe = eval(e);
    trace.brackets.emplace_back(a, b);
    while (b - a > width_stop) {
      if (spec.quantize && eval.snap(c) == eval.snap(e)) break;
      if (fc < fe) {
        b = e;
        e = c;
        fe = fc;
        c = b - rho * (b - a);
        fc = eval(c);
      } else {
        a = c;
        c = e;
        fc = fe;
        e = a + rho * (b - a);
        fe = eval(e);
      }
      trace.brackets.emplace_back(a, b);
    }
    if (spec.quantize) {
      const double q = *spec.quantize;
      const double first = eval.snap(a - q);
      const double last = eval.snap(b + q);
      const auto steps = static_cast<long>(std::llround((last - first) / q));
      for (long k = 0; k <= steps; ++k) eval(first + static_cast<double>(k) * q);
    }
    trace.converged = true;
  } catch (const BudgetExhausted&) {
    trace.budget_exceeded = true;
    trace.converged = false;
  }
  return trace;
}

double rmse_shape(const std::vector<Vec3>& a, const std::vector<Vec3>& b, int i_lo, int i_hi) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch, "rmse_shape: center counts differ (" +
                                                  std::to_string(a.size()) + " vs " +
                                                  std::to_string(b.size()) + ")");
  }
  if (i_lo < 0 || i_lo > i_hi || static_cast<std::size_t>(i_hi) >= a.size()) {
    throw Error(ErrorCode::IndexRangeInvalid, "rmse_shape: index range [" + std::to_string(i_lo) +
                                                  ", " + std::to_string(i_hi) + "] invalid for " +
                                                  std::to_string(a.size()) + " centers");
  }
  double sum = 0.0;
  for (int i = i_lo; i <= i_hi; ++i) sum += (a[i] - b[i]).squaredNorm();
  return std::sqrt(sum / (i_hi - i_lo + 1)) / 10.0;
}

double rmse_shape(const Shape& a, const Shape& b, int i_lo, int i_hi) {
  return rmse_shape(a.disk_centers, b.disk_centers, i_lo, i_hi);
}

namespace {

double interp(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
  const double u = (x - xs[i]) / (xs[i + 1] - xs[i]);
  return (1.0 - u) * ys[i] + u * ys[i + 1];
}

}  // namespace

double rmse_curvature(const CTProfile& a, const CTProfile& b) {
  if (a.s.empty() || b.s.empty() || a.kappa.size() != a.s.size() ||
      b.kappa.size() != b.s.size()) {
    throw Error(ErrorCode::EmptyOverlap, "rmse_curvature: empty profile");
  }
  const double lo = std::max(a.s.front(), b.s.front());
  const double hi = std::min(a.s.back(), b.s.back());
  if (!(hi > lo)) throw Error(ErrorCode::EmptyOverlap, "rmse_curvature: arc ranges do not overlap");
  double sum = 0.0;
  for (std::size_t i = 0; i < kCurvatureGridPoints; ++i) {
    const double s = lo + (hi - lo) * static_cast<double>(i) / (kCurvatureGridPoints - 1);
    const double d = interp(a.s, a.kappa, s) - interp(b.s, b.kappa, s);
    sum += d * d;
  }
  return std::sqrt(sum / kCurvatureGridPoints) * 10.0;
}

double tip_error(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::DimensionMismatch, "tip_error: empty shape");
  return (a.back() - b.back()).norm();
}

double tip_error(const Shape& a, const Shape& b) { return tip_error(a.disk_centers, b.disk_centers); }

}  // namespace rtdcm
