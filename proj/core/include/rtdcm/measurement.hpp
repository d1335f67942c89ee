#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "rtdcm/curve_geometry.hpp"

namespace rtdcm {

/// Repeated stylus samples of disk centers (mm), optionally labelled 1..n.
struct RawPointSet {
  std::vector<Vec3> points;
  std::vector<std::optional<int>> disk_labels;  // empty or one entry per point
};

struct ClusterResult {
  std::vector<std::vector<std::size_t>> clusters;  // point indices, ascending
  std::vector<std::size_t> noise;
  std::vector<Vec3> centroids;  // mean of each cluster's members
};

inline constexpr double kDefaultClusterEps = 8.0;  // mm
inline constexpr int kDefaultClusterMinPts = 3;

/// Density-based clustering with brute-force neighbourhoods.
///
/// A point is core when at least `min_pts` points (itself included) lie within
/// `eps` (inclusive). Clusters grow from core points in input order; a border
/// point reachable from several clusters joins the first one that reaches it.
/// Throws InvalidParams for eps <= 0, min_pts < 1 or non-finite points.
ClusterResult dbscan(const std::vector<Vec3>& points, double eps, int min_pts);

/// Greedy nearest-neighbour chain through the centroids, starting from the one
/// closest to `base_hint`. Works for any number of centroids.
std::vector<Vec3> order_centroids(const std::vector<Vec3>& centroids, const Vec3& base_hint);

/// Orders the centroids and arc-length parameterizes them. Throws
/// ClusterCountMismatch when the cluster count differs from `expected_count`.
Curve3D centers_to_curve(const ClusterResult& result, std::size_t expected_count,
                         const Vec3& base_hint = Vec3::Zero());

}  // namespace rtdcm
