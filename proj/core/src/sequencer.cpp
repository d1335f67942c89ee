#include "rtdcm/sequencer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rtdcm/error.hpp"

namespace rtdcm {

namespace {

// Arc positions of the disks scaled onto the target's own length.
std::vector<double> scaled_disk_positions(const Curve3D& curve, const ManipulatorConfig& config) {
  auto s = config.disk_arc_positions();
  const double scale = curve.length() / config.backbone_length_mm;
  for (double& v : s) v *= scale;
  return s;
}

void require_target(const Curve3D& target, const ManipulatorConfig& config) {
  if (target.size() < static_cast<std::size_t>(config.n_disks)) {
    throw Error(ErrorCode::TooFewPoints,
                "target needs at least " + std::to_string(config.n_disks) + " points, got " +
                    std::to_string(target.size()));
  }
}

template <typename F>
auto labelled(const std::string& step, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    throw Error(e.code(), step + ": " + e.what());
  }
}

}  // namespace

ActuationState full_deflection(const std::vector<DiskHypothesis>& hyps, int n_disks,
                               double tendon_mm) {
  std::vector<double> angles(static_cast<std::size_t>(n_disks), 0.0);
  for (const auto& h : hyps) {
    if (!h.deferred) angles[h.disk_index - 1] = signed_angle(h.direction, kMaxDiskAngleDeg);
  }
  return ActuationState(tendon_mm, std::move(angles));
}

ActuationState actuation_after(const MatchResult& result, std::size_t steps, int n_disks,
                               int tip_disk) {
  ActuationState state = ActuationState::rest(n_disks);
  const std::string angle_prefix = "angle:";
  for (std::size_t k = 0; k < std::min(steps, result.step_traces.size()); ++k) {
    const auto& [step, trace] = result.step_traces[k];
    if (step == "tendon") {
      state = full_deflection(result.hypotheses, n_disks, trace.best_x);
    } else if (step.starts_with(angle_prefix)) {
      const int disk = std::stoi(step.substr(angle_prefix.size()));
      for (const auto& h : result.hypotheses) {
        if (!h.deferred && h.disk_index == disk) {
          state = state.with_angle(disk, signed_angle(h.direction, trace.best_x));
          break;
        }
      }
    } else if (step == "tip") {
      state = state.with_angle(std::min(tip_disk, n_disks), trace.best_x);
    }
  }
  return state;
}

std::vector<Vec3> target_disk_centers(const Curve3D& target, const ManipulatorConfig& config) {
  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>(config.n_disks) + 1);
  out.push_back(target.points().front());
  if (target.size() == static_cast<std::size_t>(config.n_disks)) {
    for (const auto& p : target.points()) out.push_back(p);
    return out;
  }
  for (double s : scaled_disk_positions(target, config)) out.push_back(target.at(s));
  return out;
}

CTProfile smoothed_profile(const Curve3D& curve) { return smooth_profile(ct_profile(curve)); }

std::vector<DiskHypothesis> step1_identify(const Curve3D& target, const ManipulatorConfig& config,
                                           const SequencerOptions& options) {
  require_target(target, config);
  const CTProfile profile = smoothed_profile(target);
  const auto disk_s = scaled_disk_positions(target, config);
  const double threshold = default_sign_threshold(profile, options.threshold_rel);
  std::vector<DiskHypothesis> out;
  for (const auto& sc : torsion_sign_changes(profile, disk_s, threshold)) {
    DiskHypothesis h;
    h.disk_index = sc.nearest_disk;
    h.direction = rotation_for(sc.direction);
    h.source_sign_change = sc;
    h.deferred = sc.nearest_disk >= kDeferFromDisk;
    out.push_back(h);
  }
  std::stable_sort(out.begin(), out.end(), [](const DiskHypothesis& a, const DiskHypothesis& b) {
    return a.source_sign_change.s_pos < b.source_sign_change.s_pos;
  });
  return out;
}

SearchTrace step2_tendon(const Curve3D& target, const std::vector<DiskHypothesis>& hyps,
                         ForwardModel& model, const SequencerOptions& options) {
  const auto& config = model.config();
  require_target(target, config);
  const CTProfile target_profile = smoothed_profile(target);
  auto objective = [&](double tendon) {
    const Shape shape = model.forward(full_deflection(hyps, config.n_disks, tendon));
    return rmse_curvature(target_profile, smoothed_profile(shape.dense_curve));
  };
  GoldenSearchSpec spec;
  spec.lo = 0.0;
  spec.hi = kMaxTendonMm;
  spec.tol = options.tendon_tol_mm;
  spec.entry = 0.0;
  return golden_section(objective, spec);
}

std::vector<StepTrace> step3_angles(const Curve3D& target, const std::vector<DiskHypothesis>& hyps,
                                    ActuationState& state, ForwardModel& model,
                                    const SequencerOptions& options) {
  const auto& config = model.config();
  require_target(target, config);
  const auto target_centers = target_disk_centers(target, config);

  std::vector<const DiskHypothesis*> active;
  for (const auto& h : hyps) {
    if (!h.deferred) active.push_back(&h);
  }
  std::stable_sort(active.begin(), active.end(), [](const auto* a, const auto* b) {
    return a->disk_index < b->disk_index;
  });

  std::vector<StepTrace> traces;
  for (std::size_t k = 0; k < active.size(); ++k) {
    const DiskHypothesis& h = *active[k];
    const bool final = k + 1 == active.size();
    const int hi = final ? config.n_disks : std::min(h.disk_index + 2, config.n_disks);
    const int lo = final ? 0 : 1;
    auto objective = [&](double magnitude) {
      const Shape shape =
          model.forward(state.with_angle(h.disk_index, signed_angle(h.direction, magnitude)));
      return rmse_shape(shape.disk_centers, target_centers, lo, hi);
    };
    GoldenSearchSpec spec;
    spec.lo = 0.0;
    spec.hi = kMaxDiskAngleDeg;
    spec.tol = options.angle_step_deg;
    spec.quantize = options.angle_step_deg;
    spec.entry = std::min(std::abs(state.angle_deg(h.disk_index)), kMaxDiskAngleDeg);
    SearchTrace trace = golden_section(objective, spec);
    state = state.with_angle(h.disk_index, signed_angle(h.direction, trace.best_x));
    traces.push_back({"angle:" + std::to_string(h.disk_index), std::move(trace)});
  }
  return traces;
}

SearchTrace step4_tip(const Curve3D& target, ActuationState& state, ForwardModel& model,
                      const SequencerOptions& options) {
  const auto& config = model.config();
  require_target(target, config);
  const auto target_centers = target_disk_centers(target, config);
  const int disk = std::min(options.tip_disk, config.n_disks);
  const int lo = std::max(0, config.n_disks - 2);
  auto objective = [&](double angle) {
    const Shape shape = model.forward(state.with_angle(disk, angle));
    return rmse_shape(shape.disk_centers, target_centers, lo, config.n_disks);
  };
  GoldenSearchSpec spec;
  spec.lo = -options.tip_range_deg;
  spec.hi = options.tip_range_deg;
  spec.tol = options.angle_step_deg;
  spec.quantize = options.angle_step_deg;
  spec.entry = std::clamp(state.angle_deg(disk), spec.lo, spec.hi);
  SearchTrace trace = golden_section(objective, spec);
  state = state.with_angle(disk, trace.best_x);
  return trace;
}

MatchResult match_shape(const Curve3D& target, const ManipulatorConfig& config,
                        const SequencerOptions& options) {
  ForwardModel model(config);
  MatchResult result;

  result.hypotheses = labelled("step 1", [&] { return step1_identify(target, config, options); });

  SearchTrace tendon = labelled("step 2", [&] {
    return step2_tendon(target, result.hypotheses, model, options);
  });
  ActuationState state = full_deflection(result.hypotheses, config.n_disks, tendon.best_x);
  result.step_traces.push_back({"tendon", std::move(tendon)});

  auto angle_traces = labelled("step 3", [&] {
    return step3_angles(target, result.hypotheses, state, model, options);
  });
  for (auto& t : angle_traces) result.step_traces.push_back(std::move(t));

  SearchTrace tip = labelled("step 4", [&] { return step4_tip(target, state, model, options); });
  result.step_traces.push_back({"tip", std::move(tip)});

  labelled("metrics", [&] {
    result.attained_shape = model.forward(state);
    const auto target_centers = target_disk_centers(target, config);
    result.shape_rmse_cm =
        rmse_shape(result.attained_shape->disk_centers, target_centers, 0, config.n_disks);
    result.curvature_rmse_per_cm = rmse_curvature(
        smoothed_profile(target), smoothed_profile(result.attained_shape->dense_curve));
    result.tip_error_mm = tip_error(result.attained_shape->disk_centers, target_centers);
    return 0;
  });
  result.tendon_mm = state.tendon_mm();
  result.disk_angles_deg = state.disk_angles_deg();
  return result;
}

}  // namespace rtdcm
