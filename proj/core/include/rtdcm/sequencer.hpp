#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rtdcm/curve_geometry.hpp"
#include "rtdcm/optimize.hpp"
#include "rtdcm/rod_model.hpp"

namespace rtdcm {

/// Clockwise is a positive disk angle, counterclockwise a negative one.
enum class RotationDirection { Clockwise, Counterclockwise };

/// Calibration of the simulator: a negative-to-positive torsion crossing marks
/// a clockwise (positive) disk rotation.
inline constexpr bool kNegToPosIsClockwise = true;

constexpr RotationDirection rotation_for(CrossingDirection crossing) {
  const bool neg_to_pos = crossing == CrossingDirection::NegToPos;
  return neg_to_pos == kNegToPosIsClockwise ? RotationDirection::Clockwise
                                            : RotationDirection::Counterclockwise;
}

/// Signed disk angle for a rotation magnitude in the given direction.
constexpr double signed_angle(RotationDirection dir, double magnitude_deg) {
  return dir == RotationDirection::Clockwise ? magnitude_deg : -magnitude_deg;
}

/// Sign changes nearest this disk or beyond are left to the tip fine-tuning step.
inline constexpr int kDeferFromDisk = 7;

struct DiskHypothesis {
  int disk_index = 1;
  RotationDirection direction = RotationDirection::Clockwise;
  SignChange source_sign_change;
  bool deferred = false;
};

struct StepTrace {
  std::string step;  // "tendon", "angle:<disk>", "tip"
  SearchTrace trace;
};

struct MatchResult {
  std::vector<DiskHypothesis> hypotheses;
  double tendon_mm = 0.0;
  std::vector<double> disk_angles_deg;
  std::vector<StepTrace> step_traces;
  double shape_rmse_cm = 0.0;
  double curvature_rmse_per_cm = 0.0;
  double tip_error_mm = 0.0;
  std::optional<Shape> attained_shape;
};

struct SequencerOptions {
  double threshold_rel = kDefaultThresholdRel;
  double tendon_tol_mm = 1.0;
  double angle_step_deg = 1.0;
  int tip_disk = 8;
  double tip_range_deg = 20.0;
};

/// Target disk centers: index 0 is the curve start (the clamp), index i the
/// point at the arc fraction of disk i. A target with exactly n_disks points is
/// taken as the disk centers themselves.
std::vector<Vec3> target_disk_centers(const Curve3D& target, const ManipulatorConfig& config);

/// Smoothed curvature/torsion profile of a curve.
CTProfile smoothed_profile(const Curve3D& curve);

/// Step 1: one hypothesis per torsion sign change, proximal to distal.
std::vector<DiskHypothesis> step1_identify(const Curve3D& target, const ManipulatorConfig& config,
                                           const SequencerOptions& options = {});

/// Step 2: tendon search with hypothesis disks at full deflection.
SearchTrace step2_tendon(const Curve3D& target, const std::vector<DiskHypothesis>& hyps,
                         ForwardModel& model, const SequencerOptions& options = {});

/// Step 3: one magnitude search per non-deferred hypothesis. `state` carries the
/// step-2 actuation in and the solved angles out.
std::vector<StepTrace> step3_angles(const Curve3D& target, const std::vector<DiskHypothesis>& hyps,
                                    ActuationState& state, ForwardModel& model,
                                    const SequencerOptions& options = {});

/// Step 4: tip disk search over [-20, 20] deg on the distal centers.
SearchTrace step4_tip(const Curve3D& target, ActuationState& state, ForwardModel& model,
                      const SequencerOptions& options = {});

/// Step-2 actuation: non-deferred hypothesis disks at full deflection.
ActuationState full_deflection(const std::vector<DiskHypothesis>& hyps, int n_disks,
                               double tendon_mm);

/// Actuation in effect after the first `steps` entries of result.step_traces.
ActuationState actuation_after(const MatchResult& result, std::size_t steps, int n_disks,
                               int tip_disk = 8);

/// Runs steps 1 to 4. Errors are rethrown with the failing step named.
MatchResult match_shape(const Curve3D& target, const ManipulatorConfig& config,
                        const SequencerOptions& options = {});

}  // namespace rtdcm
