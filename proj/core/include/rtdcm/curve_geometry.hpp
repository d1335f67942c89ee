#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace rtdcm {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Ordered backbone samples (mm) with cumulative-chord arc length.
///
/// Invariants: at least 4 points, consecutive points farther apart than
/// 1e-6 mm, s[0] = 0 and s strictly increasing. Only constructible through
/// arc_length_parameterize, so every instance satisfies them.
class Curve3D {
 public:
  static constexpr std::size_t kMinPoints = 4;
  static constexpr double kMinChord = 1e-6;

  const std::vector<Vec3>& points() const { return points_; }
  const std::vector<double>& s() const { return s_; }
  std::size_t size() const { return points_.size(); }
  double length() const { return s_.back(); }

  /// Linear interpolation of the position at arc length `s` (clamped to the curve).
  Vec3 at(double s) const;

  friend Curve3D arc_length_parameterize(std::vector<Vec3> points);

 private:
  Curve3D() = default;
  std::vector<Vec3> points_;
  std::vector<double> s_;
};

/// Builds a Curve3D. Throws TooFewPoints (< 4 points) or DegenerateSegment.
Curve3D arc_length_parameterize(std::vector<Vec3> points);

/// Curvature and torsion samples along arc length (1/mm).
/// Where kappa_valid is false the torsion is undefined and stored as 0.
struct CTProfile {
  std::vector<double> s;
  std::vector<double> kappa;
  std::vector<double> tau;
  std::vector<bool> kappa_valid;

  std::size_t size() const { return s.size(); }
  double max_abs_tau() const;
  double max_kappa() const;
};

/// |r' x r''|^2 below this (mm^-2 scale after chord parameterization) marks
/// torsion as undefined.
inline constexpr double kCrossEpsilon = 1e-12;

/// Frenet-Serret curvature and torsion at every sample, from non-uniform
/// finite differences: 3-point stencils for r', r'', 5-point for r'''.
/// Endpoints use one-sided stencils.
CTProfile ct_profile(const Curve3D& curve);

struct SmoothingParams {
  /// Penalty weight on the unit-rescaled arc; empty selects it by GCV.
  std::optional<double> weight;
  std::size_t grid_points = 200;
  /// Optional explicit output grid (mm). Overrides grid_points when non-empty.
  std::vector<double> grid;
};

/// Cubic smoothing spline per channel, resampled on a uniform arc grid over
/// [0, s_max]. Torsion sentinels (kappa_valid == false) enter the fit as 0.
/// Throws TooFewValidSamples with fewer than 4 samples.
CTProfile smooth_profile(const CTProfile& profile, const SmoothingParams& params = {});

enum class CrossingDirection { PosToNeg, NegToPos };

struct SignChange {
  double s_pos = 0.0;
  int nearest_disk = 1;  // 1-based
  CrossingDirection direction = CrossingDirection::PosToNeg;
  double magnitude = 0.0;
};

/// Absolute floor applied by default_sign_threshold so numerically planar
/// shapes never report crossings.
inline constexpr double kTorsionNoiseFloor = 1e-5;
inline constexpr double kDefaultThresholdRel = 0.2;

/// max(rel * max|tau|, kTorsionNoiseFloor)
double default_sign_threshold(const CTProfile& profile, double rel = kDefaultThresholdRel);

/// Zero crossings of tau whose flanking lobes both peak above `threshold`.
///
/// Lobes whose peak is at or below the threshold are treated as zero and
/// neighbouring same-sign lobes merged. Crossings before the second disk are
/// dropped (clamped-base artefacts). Each crossing maps to the nearest disk;
/// an exact tie resolves to the lower index.
std::vector<SignChange> torsion_sign_changes(const CTProfile& profile,
                                             std::span<const double> disk_s, double threshold);

/// Nearest entry of `disk_s` to `s` as a 1-based index; ties go to the lower index.
int nearest_disk_index(std::span<const double> disk_s, double s);

}  // namespace rtdcm
