#include "rtdcm/rod_model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Geometry>

#include "rtdcm/error.hpp"

namespace rtdcm {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
// Local tangent of every rod frame: the backbone hangs along -z.
const Vec3 kTangent{0.0, 0.0, -1.0};

Mat3 hat(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

Mat3 so3_exp(const Vec3& phi) {
  const double theta_sq = phi.squaredNorm();
  const Mat3 k = hat(phi);
  if (theta_sq < 1e-16) return Mat3::Identity() + k + 0.5 * k * k;
  const double theta = std::sqrt(theta_sq);
  return Mat3::Identity() + (std::sin(theta) / theta) * k +
         ((1.0 - std::cos(theta)) / theta_sq) * k * k;
}

Mat3 so3_right_jacobian(const Vec3& phi) {
  const double theta_sq = phi.squaredNorm();
  const Mat3 k = hat(phi);
  if (theta_sq < 1e-16) return Mat3::Identity() - 0.5 * k + (1.0 / 6.0) * k * k;
  const double theta = std::sqrt(theta_sq);
  return Mat3::Identity() - ((1.0 - std::cos(theta)) / theta_sq) * k +
         ((theta - std::sin(theta)) / (theta_sq * theta)) * k * k;
}

struct Kinematics {
  std::vector<Vec3> x;  // nodes 0..N
  std::vector<Mat3> R;  // frame of the edge arriving at each node; R[0] = I
};

// x[k+1] = x[k] + l R[k+1] t,  R[k+1] = R[k] exp(l omega_k)
Kinematics propagate(const Dof& dof, const ManipulatorConfig& cfg) {
  const int n = cfg.elements();
  const double l = cfg.element_length();
  Kinematics k;
  k.x.resize(static_cast<std::size_t>(n + 1));
  k.R.resize(static_cast<std::size_t>(n + 1));
  k.x[0] = Vec3::Zero();
  k.R[0] = Mat3::Identity();
  for (int e = 0; e < n; ++e) {
    const Vec3 phi = l * dof.segment<3>(3 * e);
    k.R[e + 1] = k.R[e] * so3_exp(phi);
    k.x[e + 1] = k.x[e] + l * (k.R[e + 1] * kTangent);
  }
  return k;
}

Vec3 hole_offset(const ManipulatorConfig& cfg, double angle_deg) {
  const double a = angle_deg * kDegToRad;
  return {cfg.tendon_hole_radius_mm * std::cos(a), cfg.tendon_hole_radius_mm * std::sin(a), 0.0};
}

// Anchor plus one hole per disk.
std::vector<Vec3> holes_from(const Kinematics& k, const ManipulatorConfig& cfg,
                             const ActuationState& act) {
  std::vector<Vec3> h;
  h.reserve(static_cast<std::size_t>(cfg.n_disks + 1));
  h.push_back(hole_offset(cfg, 0.0));
  for (int d = 1; d <= cfg.n_disks; ++d) {
    const auto node = static_cast<std::size_t>(cfg.disk_node(d));
    h.push_back(k.x[node] + k.R[node] * hole_offset(cfg, act.angle_deg(d)));
  }
  return h;
}

double polyline_length(const std::vector<Vec3>& pts) {
  double len = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) len += (pts[i] - pts[i - 1]).norm();
  return len;
}

// Lumped point masses (g) per rod node.
std::vector<double> node_masses(const ManipulatorConfig& cfg) {
  const int n = cfg.elements();
  const double edge_mass = cfg.backbone_linear_density_g_per_mm * cfg.element_length();
  std::vector<double> m(static_cast<std::size_t>(n + 1), edge_mass);
  m.front() = 0.5 * edge_mass;
  m.back() = 0.5 * edge_mass;
  for (int d = 1; d <= cfg.n_disks; ++d) m[static_cast<std::size_t>(cfg.disk_node(d))] += cfg.disk_mass_g;
  return m;
}

void check_dims(const Dof& dof, const ManipulatorConfig& cfg, const ActuationState& act) {
  if (dof.size() != 3 * cfg.elements()) {
    throw Error(ErrorCode::DimensionMismatch,
                "dof has " + std::to_string(dof.size()) + " entries, expected " +
                    std::to_string(3 * cfg.elements()));
  }
  if (static_cast<int>(act.n_disks()) != cfg.n_disks) {
    throw Error(ErrorCode::DimensionMismatch,
                "actuation has " + std::to_string(act.n_disks()) + " disk angles, config has " +
                    std::to_string(cfg.n_disks) + " disks");
  }
}

// Energy model evaluated on joint rotation angles (rad) rather than strains;
// this is the space the solver works in.
class EnergyModel {
 public:
  EnergyModel(const ManipulatorConfig& cfg, const ActuationState& act)
      : cfg_(cfg),
        act_(act),
        l_(cfg.element_length()),
        stiffness_(cfg.bending_stiffness(), cfg.bending_stiffness(), cfg.torsional_stiffness()),
        masses_(node_masses(cfg)),
        weight_(cfg.gravity_m_per_s2 * 1e-3),
        rest_length_(slack_path_length(cfg, act) - act.tendon_mm()) {}

  int size() const { return 3 * cfg_.elements(); }

  EnergyTerms terms(const Eigen::VectorXd& angles) const {
    const Kinematics k = propagate(angles / l_, cfg_);
    EnergyTerms e;
    for (int j = 0; j < cfg_.elements(); ++j) {
      const Vec3 phi = angles.segment<3>(3 * j);
      e.elastic += 0.5 * phi.dot(stiffness_.cwiseProduct(phi)) / l_;
    }
    for (std::size_t i = 0; i < k.x.size(); ++i) e.gravity -= masses_[i] * weight_.dot(k.x[i]);
    const double ext = polyline_length(holes_from(k, cfg_, act_)) - rest_length_;
    if (ext > 0.0) e.tendon = 0.5 * cfg_.tendon_stiffness_n_per_mm * ext * ext;
    return e;
  }

  double energy(const Eigen::VectorXd& angles) const { return terms(angles).total(); }

  Eigen::VectorXd gradient(const Eigen::VectorXd& angles, double* tension = nullptr) const {
    const int n = cfg_.elements();
    const Kinematics k = propagate(angles / l_, cfg_);
    const auto holes = holes_from(k, cfg_, act_);
    const double ext = polyline_length(holes) - rest_length_;
    const double t = ext > 0.0 ? cfg_.tendon_stiffness_n_per_mm * ext : 0.0;
    if (tension) *tension = t;

    // Per-node gradient of the potential w.r.t. attached points, accumulated
    // as net vector G and moment about the origin M.
    std::vector<Vec3> g_sum(static_cast<std::size_t>(n + 1), Vec3::Zero());
    std::vector<Vec3> m_sum(static_cast<std::size_t>(n + 1), Vec3::Zero());
    for (int i = 0; i <= n; ++i) {
      const Vec3 g = -masses_[i] * weight_;
      g_sum[i] += g;
      m_sum[i] += k.x[i].cross(g);
    }
    if (t > 0.0) {
      for (int d = 1; d <= cfg_.n_disks; ++d) {
        const Vec3& h = holes[d];
        Vec3 dp = (h - holes[d - 1]).normalized();
        if (d + 1 < static_cast<int>(holes.size())) dp -= (holes[d + 1] - h).normalized();
        const Vec3 g = t * dp;
        const int node = cfg_.disk_node(d);
        g_sum[node] += g;
        m_sum[node] += h.cross(g);
      }
    }

    Eigen::VectorXd grad(size());
    Vec3 tail_g = Vec3::Zero();
    Vec3 tail_m = Vec3::Zero();
    for (int j = n - 1; j >= 0; --j) {
      tail_g += g_sum[j + 1];
      tail_m += m_sum[j + 1];
      const Vec3 world = tail_m - k.x[j].cross(tail_g);
      const Vec3 phi = angles.segment<3>(3 * j);
      const Vec3 body = so3_right_jacobian(phi).transpose() * (k.R[j + 1].transpose() * world);
      grad.segment<3>(3 * j) = body + stiffness_.cwiseProduct(phi) / l_;
    }
    return grad;
  }

 private:
  const ManipulatorConfig& cfg_;
  const ActuationState& act_;
  double l_;
  Vec3 stiffness_;
  std::vector<double> masses_;
  Vec3 weight_;  // N per gram
  double rest_length_;
};

Shape make_shape(const Kinematics& k, const ManipulatorConfig& cfg) {
  std::vector<Vec3> centers;
  std::vector<Mat3> frames;
  centers.reserve(static_cast<std::size_t>(cfg.n_disks + 1));
  frames.reserve(static_cast<std::size_t>(cfg.n_disks + 1));
  centers.push_back(k.x[0]);
  frames.push_back(k.R[0]);
  for (int d = 1; d <= cfg.n_disks; ++d) {
    const auto node = static_cast<std::size_t>(cfg.disk_node(d));
    centers.push_back(k.x[node]);
    frames.push_back(k.R[node]);
  }
  return Shape{std::move(centers), std::move(frames), arc_length_parameterize(k.x)};
}

}  // namespace

void ManipulatorConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::InvalidParams, std::string("invalid config: ") + what);
  };
  require(std::isfinite(backbone_length_mm) && backbone_length_mm > 0, "backbone_length_mm must be > 0");
  require(n_disks >= 2, "n_disks must be >= 2");
  require(std::isfinite(tendon_hole_radius_mm) && tendon_hole_radius_mm > 0,
          "tendon_hole_radius_mm must be > 0");
  require(std::isfinite(backbone_diameter_mm) && backbone_diameter_mm > 0,
          "backbone_diameter_mm must be > 0");
  require(std::isfinite(elastic_modulus_mpa) && elastic_modulus_mpa > 0, "elastic_modulus_mpa must be > 0");
  require(std::isfinite(shear_modulus_mpa) && shear_modulus_mpa > 0, "shear_modulus_mpa must be > 0");
  require(std::isfinite(disk_mass_g) && disk_mass_g > 0, "disk_mass_g must be > 0");
  require(std::isfinite(backbone_linear_density_g_per_mm) && backbone_linear_density_g_per_mm > 0,
          "backbone_linear_density_g_per_mm must be > 0");
  require(std::isfinite(tendon_stiffness_n_per_mm) && tendon_stiffness_n_per_mm > 0,
          "tendon_stiffness_n_per_mm must be > 0");
  require(gravity_m_per_s2.allFinite(), "gravity_m_per_s2 must be finite");
  require(elements_per_segment >= 1, "elements_per_segment must be >= 1");
  const double ei = bending_stiffness();
  const double gj = torsional_stiffness();
  require(std::isfinite(ei) && ei > 0 && std::isfinite(gj) && gj > 0,
          "derived stiffnesses must be finite and positive");
}

double ManipulatorConfig::bending_stiffness() const {
  const double d = backbone_diameter_mm;
  return elastic_modulus_mpa * std::numbers::pi * d * d * d * d / 64.0;
}

double ManipulatorConfig::torsional_stiffness() const {
  const double d = backbone_diameter_mm;
  return shear_modulus_mpa * std::numbers::pi * d * d * d * d / 32.0;
}

std::vector<double> ManipulatorConfig::disk_arc_positions() const {
  std::vector<double> s(static_cast<std::size_t>(n_disks));
  for (int i = 0; i < n_disks; ++i) s[i] = segment_length() * i;
  return s;
}

ActuationState::ActuationState(double tendon_mm, std::vector<double> disk_angles_deg)
    : tendon_mm_(tendon_mm), angles_(std::move(disk_angles_deg)) {
  if (!(std::isfinite(tendon_mm_) && tendon_mm_ >= 0.0 && tendon_mm_ <= kMaxTendonMm)) {
    std::ostringstream msg;
    msg << "tendon displacement " << tendon_mm_ << " mm outside [0, 140] mm";
    throw Error(ErrorCode::OutOfBounds, msg.str());
  }
  for (std::size_t i = 0; i < angles_.size(); ++i) {
    if (!(std::isfinite(angles_[i]) && std::abs(angles_[i]) <= kMaxDiskAngleDeg)) {
      std::ostringstream msg;
      msg << "disk " << i + 1 << " angle " << angles_[i] << " deg outside +/-90 deg";
      throw Error(ErrorCode::OutOfBounds, msg.str());
    }
  }
}

ActuationState ActuationState::rest(int n_disks) {
  return ActuationState(0.0, std::vector<double>(static_cast<std::size_t>(n_disks), 0.0));
}

ActuationState ActuationState::with_tendon(double tendon_mm) const {
  return ActuationState(tendon_mm, angles_);
}

ActuationState ActuationState::with_angle(int disk, double angle_deg) const {
  auto a = angles_;
  a.at(static_cast<std::size_t>(disk - 1)) = angle_deg;
  return ActuationState(tendon_mm_, std::move(a));
}

Curve3D Shape::disk_curve() const {
  return arc_length_parameterize(std::vector<Vec3>(disk_centers.begin() + 1, disk_centers.end()));
}

std::vector<Vec3> tendon_hole_positions(const Shape& shape, const ManipulatorConfig& config,
                                        const ActuationState& actuation) {
  std::vector<Vec3> h;
  h.reserve(shape.disk_centers.size());
  h.push_back(shape.disk_centers[0] + shape.disk_frames[0] * hole_offset(config, 0.0));
  for (std::size_t d = 1; d < shape.disk_centers.size(); ++d) {
    h.push_back(shape.disk_centers[d] +
                shape.disk_frames[d] * hole_offset(config, actuation.angle_deg(static_cast<int>(d))));
  }
  return h;
}

double tendon_path_length(const Shape& shape, const ManipulatorConfig& config,
                          const ActuationState& actuation) {
  return polyline_length(tendon_hole_positions(shape, config, actuation));
}

double slack_path_length(const ManipulatorConfig& config, const ActuationState& actuation) {
  const Kinematics straight = propagate(Dof::Zero(3 * config.elements()), config);
  return polyline_length(holes_from(straight, config, actuation));
}

Shape shape_from_dof(const Dof& dof, const ManipulatorConfig& config) {
  if (dof.size() != 3 * config.elements()) {
    throw Error(ErrorCode::DimensionMismatch, "dof size does not match the rod discretization");
  }
  return make_shape(propagate(dof, config), config);
}

EnergyTerms energy_terms(const Dof& dof, const ManipulatorConfig& config,
                         const ActuationState& actuation) {
  check_dims(dof, config, actuation);
  return EnergyModel(config, actuation).terms(dof * config.element_length());
}

double total_energy(const Dof& dof, const ManipulatorConfig& config,
                    const ActuationState& actuation) {
  return energy_terms(dof, config, actuation).total();
}

Dof energy_gradient(const Dof& dof, const ManipulatorConfig& config,
                    const ActuationState& actuation) {
  check_dims(dof, config, actuation);
  // d/d(strain) = l * d/d(angle)
  return config.element_length() *
         EnergyModel(config, actuation).gradient(dof * config.element_length());
}

EquilibriumReport solve_equilibrium(const ManipulatorConfig& config,
                                    const ActuationState& actuation,
                                    const std::optional<Dof>& warm_start,
                                    const SolverOptions& options) {
  config.validate();
  const Dof zero = Dof::Zero(3 * config.elements());
  check_dims(warm_start.value_or(zero), config, actuation);

  const double l = config.element_length();
  const EnergyModel model(config, actuation);
  const int n = model.size();

  Eigen::VectorXd x = warm_start.value_or(zero) * l;
  double f = model.energy(x);
  if (!std::isfinite(f)) {
    throw Error(ErrorCode::NonFiniteEnergy, "energy is not finite at the initial configuration");
  }
  Eigen::VectorXd g = model.gradient(x);

  // Damped Newton on a finite-difference Hessian of the analytic gradient,
  // with Armijo backtracking; falls back to steepest descent if the Newton
  // direction fails to decrease the energy.
  constexpr double kHessianStep = 1e-6;
  Eigen::MatrixXd H(n, n);
  int iter = 0;
  bool converged = g.lpNorm<Eigen::Infinity>() <= options.gradient_tolerance;
  while (!converged && iter < options.max_iterations) {
    ++iter;
    for (int j = 0; j < n; ++j) {
      Eigen::VectorXd xp = x;
      Eigen::VectorXd xm = x;
      xp(j) += kHessianStep;
      xm(j) -= kHessianStep;
      H.col(j) = (model.gradient(xp) - model.gradient(xm)) / (2.0 * kHessianStep);
    }
    H = 0.5 * (H + H.transpose()).eval();

    Eigen::VectorXd step;
    double shift = 0.0;
    const double diag_scale = std::max(1e-8, H.diagonal().cwiseAbs().maxCoeff());
    for (int attempt = 0; attempt < 30; ++attempt) {
      Eigen::MatrixXd Hs = H;
      Hs.diagonal().array() += shift;
      const Eigen::LLT<Eigen::MatrixXd> llt(Hs);
      if (llt.info() == Eigen::Success) {
        step = -llt.solve(g);
        break;
      }
      shift = shift == 0.0 ? 1e-6 * diag_scale : shift * 10.0;
    }
    if (step.size() == 0 || !(g.dot(step) < 0.0)) step = -g / diag_scale;

    auto line_search = [&](const Eigen::VectorXd& dir, double& f_new, Eigen::VectorXd& x_new) {
      const double slope = g.dot(dir);
      double alpha = 1.0;
      for (int k = 0; k < 30; ++k) {
        x_new = x + alpha * dir;
        f_new = model.energy(x_new);
        if (std::isfinite(f_new) && f_new <= f + 1e-4 * alpha * slope) return true;
        alpha *= 0.5;
      }
      return false;
    };

    double f_new = f;
    Eigen::VectorXd x_new;
    bool accepted = line_search(step, f_new, x_new);
    if (!accepted) {
      const Eigen::VectorXd sd = -g / diag_scale;
      accepted = line_search(sd, f_new, x_new);
    }
    if (!accepted) {
      // Near the minimum the energy decrease drowns in roundoff; take the
      // Newton step anyway if it shrinks the gradient.
      x_new = x + step;
      f_new = model.energy(x_new);
      const bool flat = std::isfinite(f_new) && f_new <= f + 1e-10 * (1.0 + std::abs(f));
      accepted = flat && model.gradient(x_new).lpNorm<Eigen::Infinity>() < g.lpNorm<Eigen::Infinity>();
    }
    if (!accepted) break;
    x = std::move(x_new);
    f = f_new;
    g = model.gradient(x);
    converged = g.lpNorm<Eigen::Infinity>() <= options.gradient_tolerance;
  }

  double tension = 0.0;
  g = model.gradient(x, &tension);
  const Dof dof = x / l;
  Shape shape = shape_from_dof(dof, config);
  const double path = tendon_path_length(shape, config, actuation);
  EquilibriumReport report{std::move(shape), dof, f, g.lpNorm<Eigen::Infinity>(), iter, false,
                           path, tension};
  report.converged = report.gradient_inf_norm <= options.gradient_tolerance;
  return report;
}

Shape forward(const ManipulatorConfig& config, const ActuationState& actuation) {
  auto report = solve_equilibrium(config, actuation);
  if (!report.converged) {
    std::ostringstream msg;
    msg << "equilibrium solve did not converge at tendon " << actuation.tendon_mm()
        << " mm (|grad| = " << report.gradient_inf_norm << " mJ/rad)";
    throw Error(ErrorCode::SolverNotConverged, msg.str());
  }
  return std::move(report.shape);
}

ForwardModel::ForwardModel(ManipulatorConfig config, SolverOptions options)
    : config_(std::move(config)), options_(options) {
  config_.validate();
}

EquilibriumReport ForwardModel::solve(const ActuationState& actuation) {
  std::lock_guard lock(mutex_);
  if (last_actuation_ && *last_actuation_ == actuation) return *last_report_;
  std::optional<Dof> warm;
  if (last_report_) warm = last_report_->dof;
  auto report = solve_equilibrium(config_, actuation, warm, options_);
  last_actuation_ = actuation;
  last_report_ = report;
  return report;
}

Shape ForwardModel::forward(const ActuationState& actuation) {
  auto report = solve(actuation);
  if (!report.converged) {
    std::ostringstream msg;
    msg << "equilibrium solve did not converge at tendon " << actuation.tendon_mm()
        << " mm (|grad| = " << report.gradient_inf_norm << " mJ/rad)";
    throw Error(ErrorCode::SolverNotConverged, msg.str());
  }
  return std::move(report.shape);
}

void ForwardModel::clear_cache() {
  std::lock_guard lock(mutex_);
  last_actuation_.reset();
  last_report_.reset();
}

}  // namespace rtdcm
