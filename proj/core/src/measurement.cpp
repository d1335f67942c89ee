#include "rtdcm/measurement.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <string>

#include "rtdcm/error.hpp"

namespace rtdcm {

ClusterResult dbscan(const std::vector<Vec3>& points, double eps, int min_pts) {
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidParams, "dbscan: eps must be > 0");
  if (min_pts < 1) throw Error(ErrorCode::InvalidParams, "dbscan: min_pts must be >= 1");
  const std::size_t n = points.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!points[i].allFinite()) {
      throw Error(ErrorCode::InvalidParams, "dbscan: point " + std::to_string(i) + " is not finite");
    }
  }

  const double eps_sq = eps * eps;
  std::vector<std::vector<std::size_t>> neighbours(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if ((points[i] - points[j]).squaredNorm() <= eps_sq) neighbours[i].push_back(j);
    }
  }
  auto is_core = [&](std::size_t i) {
    return neighbours[i].size() >= static_cast<std::size_t>(min_pts);
  };

  constexpr int kUnassigned = -1;
  std::vector<int> label(n, kUnassigned);
  ClusterResult out;
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (label[seed] != kUnassigned || !is_core(seed)) continue;
    const int id = static_cast<int>(out.clusters.size());
    out.clusters.emplace_back();
    std::deque<std::size_t> queue{seed};
    label[seed] = id;
    while (!queue.empty()) {
      const std::size_t p = queue.front();
      queue.pop_front();
      out.clusters.back().push_back(p);
      if (!is_core(p)) continue;
      for (std::size_t q : neighbours[p]) {
        if (label[q] != kUnassigned) continue;
        label[q] = id;
        queue.push_back(q);
      }
    }
    std::sort(out.clusters.back().begin(), out.clusters.back().end());
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (label[i] == kUnassigned) out.noise.push_back(i);
  }
  for (const auto& members : out.clusters) {
    Vec3 sum = Vec3::Zero();
    for (std::size_t i : members) sum += points[i];
    out.centroids.push_back(sum / static_cast<double>(members.size()));
  }
  return out;
}

std::vector<Vec3> order_centroids(const std::vector<Vec3>& centroids, const Vec3& base_hint) {
  std::vector<Vec3> out;
  if (centroids.empty()) return out;
  std::vector<bool> used(centroids.size(), false);
  auto closest_to = [&](const Vec3& p) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < centroids.size(); ++i) {
      if (used[i]) continue;
      const double d = (centroids[i] - p).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    return best;
  };
  Vec3 cursor = base_hint;
  for (std::size_t k = 0; k < centroids.size(); ++k) {
    const std::size_t next = closest_to(cursor);
    used[next] = true;
    out.push_back(centroids[next]);
    cursor = centroids[next];
  }
  return out;
}

Curve3D centers_to_curve(const ClusterResult& result, std::size_t expected_count,
                         const Vec3& base_hint) {
  if (result.centroids.size() != expected_count) {
    throw Error(ErrorCode::ClusterCountMismatch,
                "expected " + std::to_string(expected_count) + " clusters, found " +
                    std::to_string(result.centroids.size()));
  }
  return arc_length_parameterize(order_centroids(result.centroids, base_hint));
}

}  // namespace rtdcm
