// rtdcm command-line tool: simulate, analyze, cluster, match, synth.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rtdcm/curve_geometry.hpp"
#include "rtdcm/error.hpp"
#include "rtdcm/io.hpp"
#include "rtdcm/measurement.hpp"
#include "rtdcm/optimize.hpp"
#include "rtdcm/rod_model.hpp"
#include "rtdcm/sequencer.hpp"
#include "svg_plot.hpp"

#ifndef RTDCM_VERSION
#define RTDCM_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace rtdcm;
using rtdcm::tools::Panel;
using rtdcm::tools::Series;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitSolver = 3;
constexpr int kExitCluster = 4;

struct Common {
  std::string config_path;
  std::string out_dir = ".";
};

struct ActuationFlags {
  double tendon_mm = 0.0;
  std::vector<std::string> disks;  // "i=deg"
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "Manipulator config JSON (defaults if omitted)");
  cmd->add_option("--out-dir", c.out_dir, "Output directory")->capture_default_str();
}

void add_actuation(CLI::App* cmd, ActuationFlags& a) {
  cmd->add_option("--tendon-mm", a.tendon_mm, "Tendon displacement, mm [0, 140]")->capture_default_str();
  cmd->add_option("--disk", a.disks, "Disk rotation i=deg, repeatable, deg in [-90, 90]");
}

ManipulatorConfig load_config(const Common& c) {
  return c.config_path.empty() ? ManipulatorConfig{} : read_config(c.config_path);
}

ActuationState build_actuation(const ActuationFlags& flags, const ManipulatorConfig& config) {
  std::vector<double> angles(static_cast<std::size_t>(config.n_disks), 0.0);
  for (const auto& spec : flags.disks) {
    const auto eq = spec.find('=');
    int disk = 0;
    double deg = 0.0;
    try {
      if (eq == std::string::npos) throw std::invalid_argument("missing '='");
      std::size_t used = 0;
      disk = std::stoi(spec.substr(0, eq), &used);
      if (used != eq) throw std::invalid_argument("bad index");
      const std::string value = spec.substr(eq + 1);
      deg = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument("bad angle");
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, "--disk expects i=deg, got '" + spec + "'");
    }
    if (disk < 1 || disk > config.n_disks) {
      throw Error(ErrorCode::OutOfBounds, "--disk index " + std::to_string(disk) + " outside 1.." +
                                              std::to_string(config.n_disks));
    }
    angles[static_cast<std::size_t>(disk - 1)] = deg;
  }
  return ActuationState(flags.tendon_mm, std::move(angles));
}

fs::path prepare_out_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw Error(ErrorCode::ParseError, "cannot create output directory " + dir);
  return p;
}

class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}

  void write(const std::string& name, const std::string& content) {
    const fs::path p = dir_ / name;
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error(ErrorCode::ParseError, "cannot write " + p.string());
    out << content;
    written_.push_back(p.string());
  }

  const std::vector<std::string>& written() const { return written_; }
  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  std::vector<std::string> written_;
};

void write_manifest(Outputs& out, const std::string& command, const std::vector<std::string>& inputs,
                    const ManipulatorConfig& config, const ordered_json& overrides) {
  std::vector<std::string> outputs = out.written();
  outputs.push_back((out.dir() / "manifest.json").string());
  ordered_json j{{"command", command},
                 {"tool_version", RTDCM_VERSION},
                 {"inputs", inputs},
                 {"config_hash", config_hash(config)},
                 {"overrides", overrides},
                 {"outputs", outputs}};
  out.write("manifest.json", j.dump(2) + "\n");
}

std::string curve_csv(const std::vector<Vec3>& pts) {
  std::ostringstream s;
  write_curve_csv(s, pts);
  return s.str();
}

ordered_json actuation_overrides(const ActuationState& a) {
  return ordered_json::parse(actuation_to_json(a));
}

// Projections of target and attained backbones onto the x-z and y-z planes.
std::vector<Panel> overlay_panels(const std::string& title, const Curve3D& target,
                                  const Shape& attained) {
  std::vector<Panel> panels;
  for (int axis : {0, 1}) {
    Panel p;
    p.title = title + (axis == 0 ? " (x-z)" : " (y-z)");
    p.x_label = axis == 0 ? "x (mm)" : "y (mm)";
    p.y_label = "z (mm)";
    p.equal_aspect = true;
    Series t{{}, {}, "#d62728", "target", false, true};
    for (const auto& q : target.points()) {
      t.x.push_back(q[axis]);
      t.y.push_back(q.z());
    }
    Series a{{}, {}, "#1f77b4", "attained", true, false};
    for (const auto& q : attained.disk_centers) {
      a.x.push_back(q[axis]);
      a.y.push_back(q.z());
    }
    Series dense{{}, {}, "#1f77b4", "", false, false};
    for (const auto& q : attained.dense_curve.points()) {
      dense.x.push_back(q[axis]);
      dense.y.push_back(q.z());
    }
    p.series = {t, dense, a};
    panels.push_back(std::move(p));
  }
  return panels;
}

std::vector<Panel> profile_panels(const CTProfile& profile, const std::vector<double>& disk_s,
                                  const std::vector<SignChange>& changes) {
  Panel k;
  k.title = "Curvature";
  k.x_label = "s (mm)";
  k.y_label = "kappa (1/cm)";
  k.vertical_lines = disk_s;
  Series ks{profile.s, {}, "#1f77b4", "", false, false};
  for (double v : profile.kappa) ks.y.push_back(v * 10.0);
  k.series = {ks};

  Panel t;
  t.title = "Torsion";
  t.x_label = "s (mm)";
  t.y_label = "tau (1/mm)";
  t.vertical_lines = disk_s;
  t.series = {Series{profile.s, profile.tau, "#2ca02c", "", false, false}};
  if (!changes.empty()) {
    Series marks{{}, {}, "#d62728", "sign change", true, false};
    for (const auto& sc : changes) {
      marks.x.push_back(sc.s_pos);
      marks.y.push_back(0.0);
    }
    t.series.push_back(std::move(marks));
  }
  return {k, t};
}

std::vector<double> scaled_disk_s(const Curve3D& curve, const ManipulatorConfig& config) {
  auto s = config.disk_arc_positions();
  for (double& v : s) v *= curve.length() / config.backbone_length_mm;
  return s;
}

int cmd_simulate(const Common& common, const ActuationFlags& flags) {
  const auto config = load_config(common);
  const auto actuation = build_actuation(flags, config);
  const auto report = solve_equilibrium(config, actuation);
  Outputs out(prepare_out_dir(common.out_dir));
  out.write("disk_centers.csv", curve_csv(report.shape.disk_curve().points()));
  out.write("dense_curve.csv", curve_csv(report.shape.dense_curve.points()));
  out.write("report.json", report_to_json(report, actuation) + "\n");
  std::vector<std::string> inputs;
  if (!common.config_path.empty()) inputs.push_back(common.config_path);
  write_manifest(out, "simulate", inputs, config, actuation_overrides(actuation));
  if (!report.converged) {
    std::ostringstream msg;
    msg << "equilibrium solve did not converge at tendon " << actuation.tendon_mm()
        << " mm (|grad| = " << report.gradient_inf_norm << " mJ/rad)";
    throw Error(ErrorCode::SolverNotConverged, msg.str());
  }
  return kExitOk;
}

int cmd_analyze(const Common& common, const std::string& curve_path, double threshold_rel) {
  const auto config = load_config(common);
  const Curve3D curve = arc_length_parameterize(read_curve_csv(fs::path(curve_path)));
  const CTProfile smoothed = smooth_profile(ct_profile(curve));
  const auto disk_s = scaled_disk_s(curve, config);
  const auto changes =
      torsion_sign_changes(smoothed, disk_s, default_sign_threshold(smoothed, threshold_rel));

  Outputs out(prepare_out_dir(common.out_dir));
  std::ostringstream profile_csv;
  write_profile_csv(profile_csv, smoothed);
  out.write("profile.csv", profile_csv.str());
  out.write("sign_changes.json", sign_changes_to_json(changes) + "\n");
  out.write("profile.svg", tools::render_svg(profile_panels(smoothed, disk_s, changes)));
  std::vector<std::string> inputs{curve_path};
  if (!common.config_path.empty()) inputs.push_back(common.config_path);
  write_manifest(out, "analyze", inputs, config, {{"threshold_rel", round_sig9(threshold_rel)}});
  return kExitOk;
}

int cmd_cluster(const Common& common, const std::string& raw_path, double eps, int min_pts,
                std::optional<int> expect) {
  const auto config = load_config(common);
  const RawPointSet raw = read_raw_points_csv(fs::path(raw_path));
  const ClusterResult result = dbscan(raw.points, eps, min_pts);
  std::vector<Vec3> ordered;
  if (expect) {
    if (*expect < 1) throw Error(ErrorCode::InvalidParams, "--expect must be >= 1");
    if (result.centroids.size() != static_cast<std::size_t>(*expect)) {
      throw Error(ErrorCode::ClusterCountMismatch,
                  "expected " + std::to_string(*expect) + " clusters, found " +
                      std::to_string(result.centroids.size()) + " (eps " + format_number(eps) +
                      " mm, min_pts " + std::to_string(min_pts) + ")");
    }
  }
  ordered = order_centroids(result.centroids, Vec3::Zero());
  Outputs out(prepare_out_dir(common.out_dir));
  out.write("centroids.csv", curve_csv(ordered));
  ordered_json overrides{{"eps_mm", round_sig9(eps)}, {"min_pts", min_pts}};
  if (expect) overrides["expect"] = *expect;
  overrides["clusters"] = result.clusters.size();
  overrides["noise_points"] = result.noise.size();
  std::vector<std::string> inputs{raw_path};
  if (!common.config_path.empty()) inputs.push_back(common.config_path);
  write_manifest(out, "cluster", inputs, config, overrides);
  return kExitOk;
}

int cmd_match(const Common& common, const std::string& target_path, double threshold_rel) {
  const auto config = load_config(common);
  const Curve3D target = arc_length_parameterize(read_curve_csv(fs::path(target_path)));
  SequencerOptions options;
  options.threshold_rel = threshold_rel;
  const MatchResult result = match_shape(target, config, options);

  Outputs out(prepare_out_dir(common.out_dir));
  out.write("match_result.json", match_result_to_json(result) + "\n");

  const CTProfile target_profile = smoothed_profile(target);
  std::vector<SignChange> changes;
  for (const auto& h : result.hypotheses) changes.push_back(h.source_sign_change);
  out.write("step1_identify.svg",
            tools::render_svg(profile_panels(target_profile, scaled_disk_s(target, config), changes)));

  ForwardModel model(config);
  for (std::size_t k = 0; k < result.step_traces.size(); ++k) {
    const std::string& step = result.step_traces[k].step;
    std::string name;
    if (step == "tendon") {
      name = "step2_tendon";
    } else if (step == "tip") {
      name = "step4_tip";
    } else {
      name = "step3_" + step.substr(0, step.find(':')) + "_" + step.substr(step.find(':') + 1);
    }
    const Shape shape = model.forward(actuation_after(result, k + 1, config.n_disks));
    out.write(name + ".svg", tools::render_svg(overlay_panels(name, target, shape), 2, 420, 520));
  }
  std::vector<std::string> inputs{target_path};
  if (!common.config_path.empty()) inputs.push_back(common.config_path);
  write_manifest(out, "match", inputs, config, {{"threshold_rel", round_sig9(threshold_rel)}});
  return kExitOk;
}

// Repeated noisy samples around each simulated disk center plus uniform outliers.
int cmd_synth(const Common& common, const ActuationFlags& flags, int per_disk, double sigma,
              double outlier_fraction, std::uint64_t seed) {
  if (per_disk < 1 || !(sigma >= 0.0) || !(outlier_fraction >= 0.0 && outlier_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidParams,
                "synth needs --per-disk >= 1, --sigma >= 0 and --outliers in [0, 1)");
  }
  const auto config = load_config(common);
  const auto actuation = build_actuation(flags, config);
  const Shape shape = forward(config, actuation);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  RawPointSet raw;
  Vec3 lo = Vec3::Constant(1e300);
  Vec3 hi = Vec3::Constant(-1e300);
  for (int d = 1; d <= config.n_disks; ++d) {
    const Vec3& c = shape.disk_centers[static_cast<std::size_t>(d)];
    lo = lo.cwiseMin(c);
    hi = hi.cwiseMax(c);
    for (int k = 0; k < per_disk; ++k) {
      raw.points.push_back(c + Vec3(noise(rng), noise(rng), noise(rng)));
      raw.disk_labels.emplace_back(d);
    }
  }
  const auto n_outliers = static_cast<std::size_t>(
      std::llround(outlier_fraction * static_cast<double>(raw.points.size())));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Vec3 pad = Vec3::Constant(50.0);
  for (std::size_t k = 0; k < n_outliers; ++k) {
    const Vec3 u(unit(rng), unit(rng), unit(rng));
    raw.points.push_back((lo - pad) + u.cwiseProduct(hi - lo + 2 * pad));
    raw.disk_labels.emplace_back();
  }
  Outputs out(prepare_out_dir(common.out_dir));
  std::ostringstream csv;
  write_raw_points_csv(csv, raw);
  out.write("raw_points.csv", csv.str());
  ordered_json overrides = actuation_overrides(actuation);
  overrides["per_disk"] = per_disk;
  overrides["sigma_mm"] = round_sig9(sigma);
  overrides["outlier_fraction"] = round_sig9(outlier_fraction);
  overrides["seed"] = seed;
  std::vector<std::string> inputs;
  if (!common.config_path.empty()) inputs.push_back(common.config_path);
  write_manifest(out, "synth", inputs, config, overrides);
  return kExitOk;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::SolverNotConverged:
    case ErrorCode::NonFiniteEnergy: return kExitSolver;
    case ErrorCode::ClusterCountMismatch: return kExitCluster;
    default: return kExitInput;
  }
}

std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator and shape-matching solver for a reconfigurable tendon-driven continuum manipulator"};
  app.set_version_flag("--version", RTDCM_VERSION);
  app.require_subcommand(1);

  Common common;
  ActuationFlags act;
  double threshold_rel = kDefaultThresholdRel;
  std::string input_path;
  double eps = kDefaultClusterEps;
  int min_pts = kDefaultClusterMinPts;
  std::optional<int> expect;
  int per_disk = 8;
  double sigma = 1.0;
  double outliers = 0.0;
  std::uint64_t seed = 1;

  auto* simulate = app.add_subcommand("simulate", "Solve the equilibrium shape for one actuation");
  add_common(simulate, common);
  add_actuation(simulate, act);

  auto* analyze = app.add_subcommand("analyze", "Curvature/torsion profile and sign changes of a curve CSV");
  add_common(analyze, common);
  analyze->add_option("curve", input_path, "Curve CSV (x_mm,y_mm,z_mm)")->required();
  analyze->add_option("--threshold-rel", threshold_rel, "Sign-change threshold relative to max |tau|")
      ->capture_default_str();

  auto* cluster = app.add_subcommand("cluster", "Cluster repeated disk-center measurements");
  add_common(cluster, common);
  cluster->add_option("raw", input_path, "Raw points CSV (x_mm,y_mm,z_mm[,disk])")->required();
  cluster->add_option("--eps", eps, "Neighbourhood radius, mm")->capture_default_str();
  cluster->add_option("--min-pts", min_pts, "Core point neighbour count (self included)")
      ->capture_default_str();
  cluster->add_option("--expect", expect, "Required number of clusters");

  auto* match = app.add_subcommand("match", "Run the four-step shape matching on a target curve CSV");
  add_common(match, common);
  match->add_option("target", input_path, "Target curve CSV (x_mm,y_mm,z_mm)")->required();
  match->add_option("--threshold-rel", threshold_rel, "Sign-change threshold relative to max |tau|")
      ->capture_default_str();

  auto* synth = app.add_subcommand("synth", "Generate synthetic repeated disk-center measurements");
  add_common(synth, common);
  add_actuation(synth, act);
  synth->add_option("--per-disk", per_disk, "Samples per disk")->capture_default_str();
  synth->add_option("--sigma", sigma, "Measurement scatter, mm")->capture_default_str();
  synth->add_option("--outliers", outliers, "Outlier fraction of the sample count")->capture_default_str();
  synth->add_option("--seed", seed, "Random seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "ERROR InvalidArguments: " << one_line(e.what()) << '\n';
    return kExitInput;
  }

  try {
    if (*simulate) return cmd_simulate(common, act);
    if (*analyze) return cmd_analyze(common, input_path, threshold_rel);
    if (*cluster) return cmd_cluster(common, input_path, eps, min_pts, expect);
    if (*match) return cmd_match(common, input_path, threshold_rel);
    if (*synth) return cmd_synth(common, act, per_disk, sigma, outliers, seed);
  } catch (const Error& e) {
    std::cerr << "ERROR " << to_string(e.code()) << ": " << one_line(e.what()) << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "ERROR Internal: " << one_line(e.what()) << '\n';
    return 1;
  }
  return kExitInput;
}
