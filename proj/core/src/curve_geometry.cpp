#include "rtdcm/curve_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Geometry>

#include "rtdcm/error.hpp"
#include "rtdcm/smoothing_spline.hpp"

namespace rtdcm {

namespace {

// Fornberg's recursion: weights of the `order`-th derivative at x0 from
// samples at xs (any spacing).
std::vector<double> fd_weights(double x0, std::span<const double> xs, int order) {
  const int n = static_cast<int>(xs.size());
  std::vector<std::vector<double>> c(static_cast<std::size_t>(n),
                                     std::vector<double>(static_cast<std::size_t>(order + 1), 0.0));
  double c1 = 1.0;
  double c4 = xs[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = xs[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = xs[i] - xs[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) {
          c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        }
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) {
        c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      }
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) w[i] = c[i][order];
  return w;
}

// Stencil window [first, first + width) of `width` samples around i, clamped
// into [0, n).
std::size_t window_start(std::size_t i, std::size_t width, std::size_t n) {
  const std::size_t half = width / 2;
  std::size_t first = i >= half ? i - half : 0;
  if (first + width > n) first = n - width;
  return first;
}

Vec3 derivative(const Curve3D& curve, std::size_t i, int order, std::size_t width) {
  const auto& s = curve.s();
  const std::size_t first = window_start(i, width, curve.size());
  const std::span<const double> xs(s.data() + first, width);
  const auto w = fd_weights(s[i], xs, order);
  Vec3 d = Vec3::Zero();
  for (std::size_t k = 0; k < width; ++k) d += w[k] * curve.points()[first + k];
  return d;
}

}  // namespace

Vec3 Curve3D::at(double s) const {
  if (s <= s_.front()) return points_.front();
  if (s >= s_.back()) return points_.back();
  const auto it = std::upper_bound(s_.begin(), s_.end(), s);
  const std::size_t i = static_cast<std::size_t>(it - s_.begin()) - 1;
  const double u = (s - s_[i]) / (s_[i + 1] - s_[i]);
  return (1.0 - u) * points_[i] + u * points_[i + 1];
}

Curve3D arc_length_parameterize(std::vector<Vec3> points) {
  if (points.size() < Curve3D::kMinPoints) {
    throw Error(ErrorCode::TooFewPoints, "curve needs at least 4 points, got " +
                                             std::to_string(points.size()));
  }
  Curve3D c;
  c.s_.reserve(points.size());
  c.s_.push_back(0.0);
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (!points[i].allFinite()) {
      throw Error(ErrorCode::InvalidParams, "curve point " + std::to_string(i) + " is not finite");
    }
    const double chord = (points[i] - points[i - 1]).norm();
    if (!(chord > Curve3D::kMinChord)) {
      throw Error(ErrorCode::DegenerateSegment,
                  "consecutive points " + std::to_string(i - 1) + " and " + std::to_string(i) +
                      " coincide");
    }
    c.s_.push_back(c.s_.back() + chord);
  }
  c.points_ = std::move(points);
  return c;
}

double CTProfile::max_abs_tau() const {
  double m = 0.0;
  for (double t : tau) m = std::max(m, std::abs(t));
  return m;
}

double CTProfile::max_kappa() const {
  double m = 0.0;
  for (double k : kappa) m = std::max(m, k);
  return m;
}

CTProfile ct_profile(const Curve3D& curve) {
  const std::size_t n = curve.size();
  if (n < Curve3D::kMinPoints) {
    throw Error(ErrorCode::TooFewPoints, "ct_profile needs at least 4 points");
  }
  const std::size_t third_width = std::min<std::size_t>(5, n);

  CTProfile p;
  p.s = curve.s();
  p.kappa.resize(n);
  p.tau.resize(n);
  p.kappa_valid.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 d1 = derivative(curve, i, 1, 3);
    const Vec3 d2 = derivative(curve, i, 2, 3);
    const Vec3 d3 = derivative(curve, i, 3, third_width);
    const Vec3 cross = d1.cross(d2);
    const double cross_sq = cross.squaredNorm();
    const double speed = d1.norm();
    p.kappa[i] = std::sqrt(cross_sq) / (speed * speed * speed);
    if (cross_sq < kCrossEpsilon) {
      p.kappa_valid[i] = false;
      p.tau[i] = 0.0;
    } else {
      p.kappa_valid[i] = true;
      p.tau[i] = cross.dot(d3) / cross_sq;
    }
  }
  return p;
}

CTProfile smooth_profile(const CTProfile& profile, const SmoothingParams& params) {
  const std::size_t n = profile.size();
  if (profile.kappa.size() != n || profile.tau.size() != n || profile.kappa_valid.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "profile channels have different lengths");
  }
  std::size_t finite = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isfinite(profile.kappa[i]) && std::isfinite(profile.tau[i])) ++finite;
  }
  if (finite < 4 || finite != n) {
    throw Error(ErrorCode::TooFewValidSamples,
                "smoothing needs at least 4 finite samples per channel, got " +
                    std::to_string(finite) + " of " + std::to_string(n));
  }

  std::vector<double> grid = params.grid;
  if (grid.empty()) {
    if (params.grid_points < 2) {
      throw Error(ErrorCode::InvalidParams, "smoothing grid needs at least 2 points");
    }
    const double s_max = profile.s.back();
    grid.resize(params.grid_points);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      grid[i] = s_max * static_cast<double>(i) / static_cast<double>(grid.size() - 1);
    }
  }

  const auto kappa_fit = SmoothingSpline::fit(profile.s, profile.kappa, params.weight);
  const auto tau_fit = SmoothingSpline::fit(profile.s, profile.tau, params.weight);

  CTProfile out;
  out.s = grid;
  out.kappa = kappa_fit.evaluate(grid);
  out.tau = tau_fit.evaluate(grid);
  for (double& k : out.kappa) k = std::max(k, 0.0);
  out.kappa_valid.assign(grid.size(), true);
  return out;
}

double default_sign_threshold(const CTProfile& profile, double rel) {
  return std::max(rel * profile.max_abs_tau(), kTorsionNoiseFloor);
}

int nearest_disk_index(std::span<const double> disk_s, double s) {
  int best = 0;
  double best_d = std::abs(disk_s[0] - s);
  for (std::size_t i = 1; i < disk_s.size(); ++i) {
    const double d = std::abs(disk_s[i] - s);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(i);
    }
  }
  return best + 1;
}

std::vector<SignChange> torsion_sign_changes(const CTProfile& profile,
                                             std::span<const double> disk_s, double threshold) {
  if (disk_s.empty()) {
    throw Error(ErrorCode::InvalidParams, "torsion_sign_changes needs disk positions");
  }
  struct Lobe {
    int sign;
    double peak;
    double zero_before;  // arc position where the lobe starts (interpolated zero)
    double zero_after;   // arc position where it ends
  };

  const auto& s = profile.s;
  const auto& tau = profile.tau;
  const std::size_t n = s.size();
  auto sgn = [](double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); };

  // Split into maximal same-sign runs; zeros end a run.
  std::vector<Lobe> lobes;
  std::size_t i = 0;
  while (i < n) {
    const int sg = sgn(tau[i]);
    if (sg == 0) {
      ++i;
      continue;
    }
    std::size_t j = i;
    double peak = 0.0;
    while (j < n && sgn(tau[j]) == sg) {
      peak = std::max(peak, std::abs(tau[j]));
      ++j;
    }
    auto zero_between = [&](std::size_t a, std::size_t b) {
      const double ta = tau[a];
      const double tb = tau[b];
      if (ta == tb) return 0.5 * (s[a] + s[b]);
      return s[a] + (s[b] - s[a]) * ta / (ta - tb);
    };
    const double before = i == 0 ? s.front() : zero_between(i - 1, i);
    const double after = j == n ? s.back() : zero_between(j - 1, j);
    lobes.push_back({sg, peak, before, after});
    i = j;
  }

  // Drop sub-threshold lobes and merge same-sign neighbours.
  std::vector<Lobe> strong;
  for (const auto& lobe : lobes) {
    if (lobe.peak <= threshold) continue;
    if (!strong.empty() && strong.back().sign == lobe.sign) {
      strong.back().peak = std::max(strong.back().peak, lobe.peak);
      strong.back().zero_after = lobe.zero_after;
    } else {
      strong.push_back(lobe);
    }
  }

  const double suppress_below = disk_s.size() > 1 ? disk_s[1] : disk_s[0];
  std::vector<SignChange> out;
  for (std::size_t k = 1; k < strong.size(); ++k) {
    const Lobe& a = strong[k - 1];
    const Lobe& b = strong[k];
    const double pos = 0.5 * (a.zero_after + b.zero_before);
    if (pos < suppress_below) continue;
    SignChange sc;
    sc.s_pos = pos;
    sc.nearest_disk = nearest_disk_index(disk_s, pos);
    sc.direction = a.sign > 0 ? CrossingDirection::PosToNeg : CrossingDirection::NegToPos;
    sc.magnitude = std::min(a.peak, b.peak);
    out.push_back(sc);
  }
  return out;
}

}  // namespace rtdcm
