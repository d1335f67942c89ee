#pragma once

#include <cstddef>
#include <mutex>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "rtdcm/curve_geometry.hpp"

namespace rtdcm {

inline constexpr double kMaxTendonMm = 140.0;
inline constexpr double kMaxDiskAngleDeg = 90.0;

/// Geometry, material and mass parameters of the manipulator.
///
/// Disks are numbered 1..n_disks and sit at arc positions (i - 1) * L / (n_disks - 1):
/// disk 1 is mounted on the clamped base plate, disk n_disks at the tip. The
/// backbone hangs from the clamp along -z of the base frame.
struct ManipulatorConfig {
  double backbone_length_mm = 560.0;
  int n_disks = 9;
  double tendon_hole_radius_mm = 34.0;
  double backbone_diameter_mm = 1.5;
  double elastic_modulus_mpa = 60000.0;  // Nitinol
  double shear_modulus_mpa = 23000.0;
  double disk_mass_g = 8.0;
  double backbone_linear_density_g_per_mm = 0.0114;
  double tendon_stiffness_n_per_mm = 50.0;
  Vec3 gravity_m_per_s2{0.0, 0.0, -9.81};
  int elements_per_segment = 4;

  /// Throws InvalidParams naming the first violated invariant.
  void validate() const;

  double bending_stiffness() const;    // EI, N mm^2
  double torsional_stiffness() const;  // GJ, N mm^2
  int segments() const { return n_disks - 1; }
  int elements() const { return segments() * elements_per_segment; }
  double segment_length() const { return backbone_length_mm / segments(); }
  double element_length() const { return segment_length() / elements_per_segment; }
  /// Rod node carrying disk `disk` (1-based).
  int disk_node(int disk) const { return (disk - 1) * elements_per_segment; }
  /// Arc positions of disks 1..n_disks (mm).
  std::vector<double> disk_arc_positions() const;

  bool operator==(const ManipulatorConfig&) const = default;
};

/// Tendon displacement plus one rotation per disk.
///
/// Angles are degrees, positive counterclockwise viewed from the base toward
/// the tip; a disk at angle theta carries its hole at (r cos theta, r sin theta)
/// in its own frame. Construction enforces the actuator limits.
class ActuationState {
 public:
  ActuationState(double tendon_mm, std::vector<double> disk_angles_deg);
  /// Zero actuation for `n_disks` disks.
  static ActuationState rest(int n_disks = 9);

  double tendon_mm() const { return tendon_mm_; }
  const std::vector<double>& disk_angles_deg() const { return angles_; }
  double angle_deg(int disk) const { return angles_.at(static_cast<std::size_t>(disk - 1)); }
  std::size_t n_disks() const { return angles_.size(); }

  ActuationState with_tendon(double tendon_mm) const;
  ActuationState with_angle(int disk, double angle_deg) const;

  bool operator==(const ActuationState&) const = default;

 private:
  double tendon_mm_;
  std::vector<double> angles_;
};

/// Equilibrium backbone geometry. Index 0 of centers/frames is the clamped
/// base plate; index i >= 1 is disk i (disk 1 coincides with the base plate).
struct Shape {
  std::vector<Vec3> disk_centers;
  std::vector<Mat3> disk_frames;
  Curve3D dense_curve;

  const Vec3& tip() const { return disk_centers.back(); }
  /// Disk centers 1..n as a curve (the sampled shape a stylus would record).
  Curve3D disk_curve() const;
};

/// Joint strains: three per rod element (two bending, one twist), 1/mm.
using Dof = Eigen::VectorXd;

struct EnergyTerms {
  double elastic = 0.0;
  double gravity = 0.0;
  double tendon = 0.0;
  double total() const { return elastic + gravity + tendon; }
};

struct EquilibriumReport {
  Shape shape;
  Dof dof;
  double energy = 0.0;             // mJ
  double gradient_inf_norm = 0.0;  // mJ per rad of joint rotation
  int iterations = 0;
  bool converged = false;
  double tendon_path_length = 0.0;  // mm
  double tendon_tension = 0.0;      // N
};

struct SolverOptions {
  double gradient_tolerance = 1e-4;  // mJ/rad
  int max_iterations = 5000;
};

/// Base anchor followed by one hole per disk (n_disks + 1 points, mm).
std::vector<Vec3> tendon_hole_positions(const Shape& shape, const ManipulatorConfig& config,
                                        const ActuationState& actuation);

/// Polyline length through the holes from the base anchor to the tip disk.
double tendon_path_length(const Shape& shape, const ManipulatorConfig& config,
                          const ActuationState& actuation);

/// Slack path length: the path through the holes at the current disk angles
/// with the backbone straight.
double slack_path_length(const ManipulatorConfig& config, const ActuationState& actuation);

/// Reconstructs the rod by frame propagation from joint strains.
Shape shape_from_dof(const Dof& dof, const ManipulatorConfig& config);

EnergyTerms energy_terms(const Dof& dof, const ManipulatorConfig& config,
                         const ActuationState& actuation);
double total_energy(const Dof& dof, const ManipulatorConfig& config,
                    const ActuationState& actuation);
/// Analytic gradient of total_energy with respect to the joint strains.
Dof energy_gradient(const Dof& dof, const ManipulatorConfig& config,
                    const ActuationState& actuation);

/// Minimizes total_energy over the joint strains. Returns converged = false
/// instead of throwing when the iteration budget runs out.
EquilibriumReport solve_equilibrium(const ManipulatorConfig& config,
                                    const ActuationState& actuation,
                                    const std::optional<Dof>& warm_start = std::nullopt,
                                    const SolverOptions& options = {});

/// Cold-start solve; throws SolverNotConverged.
Shape forward(const ManipulatorConfig& config, const ActuationState& actuation);

/// Forward map with a warm-start cache: each solve starts from the previous
/// call's equilibrium, and an identical repeated call returns the cached
/// result unchanged. Safe to share between threads.
class ForwardModel {
 public:
  explicit ForwardModel(ManipulatorConfig config, SolverOptions options = {});

  const ManipulatorConfig& config() const { return config_; }

  /// Throws SolverNotConverged.
  Shape forward(const ActuationState& actuation);
  EquilibriumReport solve(const ActuationState& actuation);
  void clear_cache();

 private:
  ManipulatorConfig config_;
  SolverOptions options_;
  std::mutex mutex_;
  std::optional<ActuationState> last_actuation_;
  std::optional<EquilibriumReport> last_report_;
};

}  // namespace rtdcm
