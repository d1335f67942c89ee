#include "rtdcm/smoothing_spline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "rtdcm/error.hpp"

namespace rtdcm {

namespace {

// Band structure of the roughness penalty: K = Q R^-1 Q^T on knots t.
struct Penalty {
  Eigen::MatrixXd Q;  // n x (n-2)
  Eigen::MatrixXd R;  // (n-2) x (n-2)
};

Penalty build_penalty(const std::vector<double>& t) {
  const auto n = static_cast<Eigen::Index>(t.size());
  Penalty p{Eigen::MatrixXd::Zero(n, n - 2), Eigen::MatrixXd::Zero(n - 2, n - 2)};
  for (Eigen::Index j = 1; j + 1 < n; ++j) {
    const double h0 = t[j] - t[j - 1];
    const double h1 = t[j + 1] - t[j];
    const Eigen::Index c = j - 1;
    p.Q(j - 1, c) = 1.0 / h0;
    p.Q(j, c) = -1.0 / h0 - 1.0 / h1;
    p.Q(j + 1, c) = 1.0 / h1;
    p.R(c, c) = (h0 + h1) / 3.0;
    if (c + 1 < n - 2) {
      p.R(c, c + 1) = h1 / 6.0;
      p.R(c + 1, c) = h1 / 6.0;
    }
  }
  return p;
}

}  // namespace

SmoothingSpline SmoothingSpline::fit(std::span<const double> x, std::span<const double> y,
                                     std::optional<double> lambda) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::DimensionMismatch, "smoothing spline: x and y lengths differ");
  }
  if (x.size() < 4) {
    throw Error(ErrorCode::TooFewValidSamples,
                "smoothing spline needs at least 4 samples, got " + std::to_string(x.size()));
  }
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (!(x[i] > x[i - 1])) {
      throw Error(ErrorCode::InvalidParams, "smoothing spline: abscissae must be strictly increasing");
    }
  }
  if (lambda && !(*lambda >= 0.0 && std::isfinite(*lambda))) {
    throw Error(ErrorCode::InvalidParams, "smoothing spline: lambda must be finite and >= 0");
  }

  SmoothingSpline s;
  s.origin_ = x.front();
  s.scale_ = x.back() - x.front();
  s.knots_.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) s.knots_[i] = (x[i] - s.origin_) / s.scale_;

  const auto n = static_cast<Eigen::Index>(x.size());
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);
  const Penalty pen = build_penalty(s.knots_);
  const Eigen::LDLT<Eigen::MatrixXd> r_ldlt(pen.R);
  const Eigen::MatrixXd K = pen.Q * r_ldlt.solve(pen.Q.transpose());

  // K is symmetric PSD with a two-dimensional null space (linear functions).
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K);
  const Eigen::VectorXd d = eig.eigenvalues().cwiseMax(0.0);
  const Eigen::VectorXd coef = eig.eigenvectors().transpose() * yv;

  auto gcv = [&](double lam) {
    double rss = 0.0;
    double trace = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double shrink = 1.0 / (1.0 + lam * d(i));
      const double resid = (1.0 - shrink) * coef(i);
      rss += resid * resid;
      trace += shrink;
    }
    const double dof = static_cast<double>(n) - trace;
    if (dof <= 1e-12) return std::numeric_limits<double>::infinity();
    return static_cast<double>(n) * rss / (dof * dof);
  };

  double lam = 0.0;
  if (lambda) {
    lam = *lambda;
  } else {
    // Coarse scan in log10(lambda), then golden refinement around the best cell.
    constexpr double kLo = -14.0;
    constexpr double kHi = 4.0;
    constexpr double kStep = 0.25;
    double best_log = kLo;
    double best_score = std::numeric_limits<double>::infinity();
    for (double lg = kLo; lg <= kHi + 1e-12; lg += kStep) {
      const double score = gcv(std::pow(10.0, lg));
      if (score < best_score) {
        best_score = score;
        best_log = lg;
      }
    }
    double a = best_log - kStep;
    double b = best_log + kStep;
    const double rho = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - rho * (b - a);
    double e = a + rho * (b - a);
    double fc = gcv(std::pow(10.0, c));
    double fe = gcv(std::pow(10.0, e));
    for (int it = 0; it < 40; ++it) {
      if (fc < fe) {
        b = e;
        e = c;
        fe = fc;
        c = b - rho * (b - a);
        fc = gcv(std::pow(10.0, c));
      } else {
        a = c;
        c = e;
        fc = fe;
        e = a + rho * (b - a);
        fe = gcv(std::pow(10.0, e));
      }
    }
    const double refined = 0.5 * (a + b);
    lam = gcv(std::pow(10.0, refined)) <= best_score ? std::pow(10.0, refined)
                                                      : std::pow(10.0, best_log);
  }
  s.lambda_ = lam;

  Eigen::VectorXd f;
  if (lam == 0.0) {
    f = yv;
  } else {
    Eigen::VectorXd shrunk(n);
    for (Eigen::Index i = 0; i < n; ++i) shrunk(i) = coef(i) / (1.0 + lam * d(i));
    f = eig.eigenvectors() * shrunk;
  }
  const Eigen::VectorXd gamma = r_ldlt.solve(pen.Q.transpose() * f);

  s.values_.assign(f.data(), f.data() + n);
  s.second_.assign(static_cast<std::size_t>(n), 0.0);
  for (Eigen::Index j = 1; j + 1 < n; ++j) s.second_[j] = gamma(j - 1);
  return s;
}

double SmoothingSpline::operator()(double x) const {
  const double u = (x - origin_) / scale_;
  const auto& t = knots_;
  const std::size_t n = t.size();
  // Linear extrapolation outside the knot span (natural boundary).
  if (u <= t.front() || u >= t.back()) {
    const bool left = u <= t.front();
    const std::size_t i = left ? 0 : n - 2;
    const double h = t[i + 1] - t[i];
    const double secant = (values_[i + 1] - values_[i]) / h;
    const double slope = left ? secant - h * (2.0 * second_[i] + second_[i + 1]) / 6.0
                              : secant + h * (second_[i] + 2.0 * second_[i + 1]) / 6.0;
    const double base = left ? values_.front() : values_.back();
    const double anchor = left ? t.front() : t.back();
    return base + slope * (u - anchor);
  }
  const auto it = std::upper_bound(t.begin(), t.end(), u);
  const std::size_t i = static_cast<std::size_t>(it - t.begin()) - 1;
  const double h = t[i + 1] - t[i];
  const double a = (t[i + 1] - u) / h;
  const double b = (u - t[i]) / h;
  return a * values_[i] + b * values_[i + 1] +
         ((a * a * a - a) * second_[i] + (b * b * b - b) * second_[i + 1]) * h * h / 6.0;
}

std::vector<double> SmoothingSpline::evaluate(std::span<const double> xs) const {
  std::vector<double> out;
  out.reserve(xs.size());
  for (double x : xs) out.push_back((*this)(x));
  return out;
}

}  // namespace rtdcm
