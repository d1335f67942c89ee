#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "rtdcm/curve_geometry.hpp"
#include "rtdcm/measurement.hpp"
#include "rtdcm/optimize.hpp"
#include "rtdcm/rod_model.hpp"
#include "rtdcm/sequencer.hpp"

namespace rtdcm {

/// 9 significant digits, the precision of every number written to JSON.
std::string format_number(double v);
/// Rounds v to 9 significant digits.
double round_sig9(double v);

// CSV. Readers throw ParseError naming the offending row and column.

/// Header `x_mm,y_mm,z_mm`, base first.
void write_curve_csv(std::ostream& out, const std::vector<Vec3>& points);
std::vector<Vec3> read_curve_csv(std::istream& in);
std::vector<Vec3> read_curve_csv(const std::filesystem::path& path);

/// Header `s_mm,kappa_per_mm,tau_per_mm,valid,kappa_per_cm`.
void write_profile_csv(std::ostream& out, const CTProfile& profile);

/// Header `x_mm,y_mm,z_mm` with an optional fourth `disk` column. Empty input
/// throws ParseError.
RawPointSet read_raw_points_csv(std::istream& in);
RawPointSet read_raw_points_csv(const std::filesystem::path& path);
void write_raw_points_csv(std::ostream& out, const RawPointSet& points);

// JSON. Parsers throw ParseError on malformed text or unknown keys.

std::string config_to_json(const ManipulatorConfig& config);
/// Missing keys keep their defaults; the result is validated.
ManipulatorConfig config_from_json(const std::string& text);
ManipulatorConfig read_config(const std::filesystem::path& path);
/// Stable 64-bit FNV-1a hash of the canonical config JSON, as 16 hex digits.
std::string config_hash(const ManipulatorConfig& config);

std::string actuation_to_json(const ActuationState& actuation);
ActuationState actuation_from_json(const std::string& text);

std::string report_to_json(const EquilibriumReport& report, const ActuationState& actuation);
std::string sign_changes_to_json(const std::vector<SignChange>& changes);
std::string trace_to_json(const SearchTrace& trace);
std::string match_result_to_json(const MatchResult& result);

std::string to_string(CrossingDirection d);
std::string to_string(RotationDirection d);

}  // namespace rtdcm
