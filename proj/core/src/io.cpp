#include "rtdcm/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "rtdcm/error.hpp"

namespace rtdcm {

using nlohmann::ordered_json;

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

double round_sig9(double v) {
  if (!std::isfinite(v)) return v;
  return std::stod(format_number(v));
}

namespace {

std::string format_csv(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

[[noreturn]] void parse_fail(std::size_t row, std::size_t col, const std::string& what) {
  throw Error(ErrorCode::ParseError,
              "row " + std::to_string(row) + ", column " + std::to_string(col) + ": " + what);
}

double parse_double(const std::string& cell, std::size_t row, std::size_t col) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &used);
  } catch (const std::exception&) {
    parse_fail(row, col, "'" + cell + "' is not a number");
  }
  if (used != cell.size()) parse_fail(row, col, "'" + cell + "' is not a number");
  if (!std::isfinite(v)) parse_fail(row, col, "value is not finite");
  return v;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path.string());
  return in;
}

// Reads data rows after a header whose first three names are x_mm,y_mm,z_mm.
// Returns the header cells; `rows` receives the parsed rows with line numbers.
std::vector<std::string> read_table(std::istream& in,
                                    std::vector<std::pair<std::size_t, std::vector<std::string>>>& rows) {
  std::string line;
  std::size_t row = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    if (header.empty()) {
      header = split(line);
      if (header.size() < 3 || header[0] != "x_mm" || header[1] != "y_mm" || header[2] != "z_mm") {
        parse_fail(row, 1, "expected header starting x_mm,y_mm,z_mm");
      }
      continue;
    }
    auto cells = split(line);
    if (cells.size() != header.size()) {
      parse_fail(row, std::min(cells.size(), header.size()) + 1,
                 "expected " + std::to_string(header.size()) + " columns, got " +
                     std::to_string(cells.size()));
    }
    rows.emplace_back(row, std::move(cells));
  }
  if (header.empty()) throw Error(ErrorCode::ParseError, "row 1, column 1: empty input");
  return header;
}

ordered_json num(double v) { return round_sig9(v); }

ordered_json vec_json(const Vec3& v) { return ordered_json::array({num(v.x()), num(v.y()), num(v.z())}); }

ordered_json trace_json(const SearchTrace& trace) {
  ordered_json evals = ordered_json::array();
  for (const auto& e : trace.evals) evals.push_back({{"x", num(e.x)}, {"f", num(e.f)}});
  return {{"evals", evals},
          {"best_x", num(trace.best_x)},
          {"best_f", num(trace.best_f)},
          {"converged", trace.converged}};
}

ordered_json sign_change_json(const SignChange& sc) {
  return {{"s_mm", num(sc.s_pos)},
          {"nearest_disk", sc.nearest_disk},
          {"direction", to_string(sc.direction)},
          {"magnitude_per_mm", num(sc.magnitude)}};
}

ordered_json parse_json(const std::string& text, const char* what) {
  try {
    return ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string(what) + ": " + e.what());
  }
}

}  // namespace

std::string to_string(CrossingDirection d) {
  return d == CrossingDirection::PosToNeg ? "PosToNeg" : "NegToPos";
}

std::string to_string(RotationDirection d) {
  return d == RotationDirection::Clockwise ? "Clockwise" : "Counterclockwise";
}

void write_curve_csv(std::ostream& out, const std::vector<Vec3>& points) {
  out << "x_mm,y_mm,z_mm\n";
  for (const auto& p : points) {
    out << format_csv(p.x()) << ',' << format_csv(p.y()) << ',' << format_csv(p.z()) << '\n';
  }
}

std::vector<Vec3> read_curve_csv(std::istream& in) {
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
  const auto header = read_table(in, rows);
  if (header.size() != 3) parse_fail(1, 4, "curve CSV has exactly three columns");
  std::vector<Vec3> out;
  for (const auto& [row, cells] : rows) {
    out.emplace_back(parse_double(cells[0], row, 1), parse_double(cells[1], row, 2),
                     parse_double(cells[2], row, 3));
  }
  return out;
}

std::vector<Vec3> read_curve_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_curve_csv(in);
}

void write_profile_csv(std::ostream& out, const CTProfile& profile) {
  out << "s_mm,kappa_per_mm,tau_per_mm,valid,kappa_per_cm\n";
  for (std::size_t i = 0; i < profile.size(); ++i) {
    out << format_csv(profile.s[i]) << ',' << format_csv(profile.kappa[i]) << ','
        << format_csv(profile.tau[i]) << ',' << (profile.kappa_valid[i] ? 1 : 0) << ','
        << format_csv(profile.kappa[i] * 10.0) << '\n';
  }
}

RawPointSet read_raw_points_csv(std::istream& in) {
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
  const auto header = read_table(in, rows);
  const bool labelled = header.size() == 4;
  if (header.size() > 4 || (labelled && header[3] != "disk")) {
    parse_fail(1, 4, "expected header x_mm,y_mm,z_mm[,disk]");
  }
  RawPointSet out;
  for (const auto& [row, cells] : rows) {
    out.points.emplace_back(parse_double(cells[0], row, 1), parse_double(cells[1], row, 2),
                            parse_double(cells[2], row, 3));
    if (labelled) {
      if (cells[3].empty()) {
        out.disk_labels.emplace_back();
      } else {
        const double d = parse_double(cells[3], row, 4);
        if (d != std::floor(d) || d < 1) parse_fail(row, 4, "disk label must be a positive integer");
        out.disk_labels.emplace_back(static_cast<int>(d));
      }
    }
  }
  if (out.points.empty()) throw Error(ErrorCode::ParseError, "raw point CSV has no data rows");
  return out;
}

RawPointSet read_raw_points_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_raw_points_csv(in);
}

void write_raw_points_csv(std::ostream& out, const RawPointSet& points) {
  const bool labelled = !points.disk_labels.empty();
  out << (labelled ? "x_mm,y_mm,z_mm,disk\n" : "x_mm,y_mm,z_mm\n");
  for (std::size_t i = 0; i < points.points.size(); ++i) {
    const auto& p = points.points[i];
    out << format_csv(p.x()) << ',' << format_csv(p.y()) << ',' << format_csv(p.z());
    if (labelled) {
      out << ',';
      if (points.disk_labels[i]) out << *points.disk_labels[i];
    }
    out << '\n';
  }
}

std::string config_to_json(const ManipulatorConfig& c) {
  ordered_json j{{"backbone_length_mm", num(c.backbone_length_mm)},
                 {"n_disks", c.n_disks},
                 {"tendon_hole_radius_mm", num(c.tendon_hole_radius_mm)},
                 {"backbone_diameter_mm", num(c.backbone_diameter_mm)},
                 {"elastic_modulus_mpa", num(c.elastic_modulus_mpa)},
                 {"shear_modulus_mpa", num(c.shear_modulus_mpa)},
                 {"disk_mass_g", num(c.disk_mass_g)},
                 {"backbone_linear_density_g_per_mm", num(c.backbone_linear_density_g_per_mm)},
                 {"tendon_stiffness_n_per_mm", num(c.tendon_stiffness_n_per_mm)},
                 {"gravity_m_per_s2", vec_json(c.gravity_m_per_s2)},
                 {"elements_per_segment", c.elements_per_segment}};
  return j.dump(2);
}

ManipulatorConfig config_from_json(const std::string& text) {
  const auto j = parse_json(text, "config JSON");
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "config JSON must be an object");
  ManipulatorConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "backbone_length_mm") c.backbone_length_mm = value.get<double>();
      else if (key == "n_disks") c.n_disks = value.get<int>();
      else if (key == "tendon_hole_radius_mm") c.tendon_hole_radius_mm = value.get<double>();
      else if (key == "backbone_diameter_mm") c.backbone_diameter_mm = value.get<double>();
      else if (key == "elastic_modulus_mpa") c.elastic_modulus_mpa = value.get<double>();
      else if (key == "shear_modulus_mpa") c.shear_modulus_mpa = value.get<double>();
      else if (key == "disk_mass_g") c.disk_mass_g = value.get<double>();
      else if (key == "backbone_linear_density_g_per_mm")
        c.backbone_linear_density_g_per_mm = value.get<double>();
      else if (key == "tendon_stiffness_n_per_mm") c.tendon_stiffness_n_per_mm = value.get<double>();
      else if (key == "elements_per_segment") c.elements_per_segment = value.get<int>();
      else if (key == "gravity_m_per_s2") {
        const auto g = value.get<std::vector<double>>();
        if (g.size() != 3) throw Error(ErrorCode::ParseError, "gravity_m_per_s2 needs 3 components");
        c.gravity_m_per_s2 = Vec3(g[0], g[1], g[2]);
      } else {
        throw Error(ErrorCode::ParseError, "unknown config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("config JSON: ") + e.what());
  }
  c.validate();
  return c;
}

ManipulatorConfig read_config(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

std::string config_hash(const ManipulatorConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : config_to_json(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

std::string actuation_to_json(const ActuationState& a) {
  ordered_json angles = ordered_json::array();
  for (double v : a.disk_angles_deg()) angles.push_back(num(v));
  return ordered_json{{"tendon_mm", num(a.tendon_mm())}, {"disk_angles_deg", angles}}.dump(2);
}

ActuationState actuation_from_json(const std::string& text) {
  const auto j = parse_json(text, "actuation JSON");
  try {
    return ActuationState(j.at("tendon_mm").get<double>(),
                          j.at("disk_angles_deg").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("actuation JSON: ") + e.what());
  }
}

std::string report_to_json(const EquilibriumReport& r, const ActuationState& actuation) {
  ordered_json centers = ordered_json::array();
  for (const auto& p : r.shape.disk_centers) centers.push_back(vec_json(p));
  ordered_json j{{"actuation", ordered_json::parse(actuation_to_json(actuation))},
                 {"energy_mj", num(r.energy)},
                 {"gradient_inf_norm_mj_per_rad", num(r.gradient_inf_norm)},
                 {"iterations", r.iterations},
                 {"converged", r.converged},
                 {"tendon_path_length_mm", num(r.tendon_path_length)},
                 {"tendon_tension_n", num(r.tendon_tension)},
                 {"tip_mm", vec_json(r.shape.tip())},
                 {"disk_centers_mm", centers}};
  return j.dump(2);
}

std::string sign_changes_to_json(const std::vector<SignChange>& changes) {
  ordered_json arr = ordered_json::array();
  for (const auto& sc : changes) arr.push_back(sign_change_json(sc));
  return arr.dump(2);
}

std::string trace_to_json(const SearchTrace& trace) { return trace_json(trace).dump(2); }

std::string match_result_to_json(const MatchResult& r) {
  ordered_json hyps = ordered_json::array();
  for (const auto& h : r.hypotheses) {
    hyps.push_back({{"disk_index", h.disk_index},
                    {"direction", to_string(h.direction)},
                    {"deferred", h.deferred},
                    {"sign_change", sign_change_json(h.source_sign_change)}});
  }
  ordered_json angles = ordered_json::array();
  for (double v : r.disk_angles_deg) angles.push_back(num(v));
  ordered_json traces = ordered_json::array();
  for (const auto& t : r.step_traces) {
    ordered_json tj = trace_json(t.trace);
    tj["step"] = t.step;
    traces.push_back(std::move(tj));
  }
  ordered_json j{{"hypotheses", hyps},
                 {"tendon_mm", num(r.tendon_mm)},
                 {"disk_angles_deg", angles},
                 {"metrics",
                  {{"shape_rmse_cm", num(r.shape_rmse_cm)},
                   {"curvature_rmse_per_cm", num(r.curvature_rmse_per_cm)},
                   {"tip_error_mm", num(r.tip_error_mm)}}},
                 {"traces", traces}};
  return j.dump(2);
}

}  // namespace rtdcm
