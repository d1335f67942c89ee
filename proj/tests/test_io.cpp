#include <gtest/gtest.h>

#include <sstream>

#include "rtdcm/error.hpp"
#include "rtdcm/io.hpp"
#include "test_support.hpp"

using namespace rtdcm;

namespace {

std::string parse_error_message(const std::string& csv) {
  std::istringstream in(csv);
  try {
    read_curve_csv(in);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    return e.what();
  }
  ADD_FAILURE() << "no error for:\n" << csv;
  return {};
}

}  // namespace

TEST(Csv, SimulatedShapeRoundTrip) {
  const Shape s = rtdcm::testing::simulate(100, {{5, -70}});
  std::stringstream buf;
  write_curve_csv(buf, s.dense_curve.points());
  const auto back = read_curve_csv(buf);
  ASSERT_EQ(back.size(), s.dense_curve.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_LT((back[i] - s.dense_curve.points()[i]).norm(), 1e-6);
  }
  const auto curve = arc_length_parameterize(back);
  EXPECT_NEAR(curve.length(), s.dense_curve.length(), 1e-6);
}

TEST(Csv, HeaderAndBlankLines) {
  std::istringstream in("x_mm,y_mm,z_mm\n1,2,3\n\n4, 5 ,6\n");
  const auto p = read_curve_csv(in);
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p[1], Vec3(4, 5, 6));
}

TEST(Csv, ErrorsNameRowAndColumn) {
  EXPECT_NE(parse_error_message("x_mm,y_mm,z_mm\n1,2,3\n4,abc,6\n").find("row 3, column 2"), std::string::npos);
  EXPECT_NE(parse_error_message("x_mm,y_mm,z_mm\n1,2\n").find("row 2, column 3"), std::string::npos);
  EXPECT_NE(parse_error_message("a,b,c\n1,2,3\n").find("row 1, column 1"), std::string::npos);
  EXPECT_NE(parse_error_message("").find("empty input"), std::string::npos);
  EXPECT_NE(parse_error_message("x_mm,y_mm,z_mm\n1,2,inf\n").find("row 2, column 3"), std::string::npos);
}

TEST(Csv, RawPointsWithLabels) {
  RawPointSet set;
  set.points = {Vec3(1, 2, 3), Vec3(4, 5, 6)};
  set.disk_labels = {3, std::nullopt};
  std::stringstream buf;
  write_raw_points_csv(buf, set);
  const auto back = read_raw_points_csv(buf);
  ASSERT_EQ(back.points.size(), 2u);
  EXPECT_EQ(back.points[1], Vec3(4, 5, 6));
  ASSERT_EQ(back.disk_labels.size(), 2u);
  EXPECT_EQ(back.disk_labels[0], 3);
  EXPECT_FALSE(back.disk_labels[1].has_value());
  std::istringstream header_only("x_mm,y_mm,z_mm\n");
  EXPECT_THROW(read_raw_points_csv(header_only), Error);
}

TEST(Json, ConfigRoundTripAndHash) {
  ManipulatorConfig c;
  c.disk_mass_g = 12.5;
  c.tendon_stiffness_n_per_mm = 30;
  const auto back = config_from_json(config_to_json(c));
  EXPECT_EQ(back, c);
  EXPECT_EQ(config_hash(back), config_hash(c));
  EXPECT_NE(config_hash(c), config_hash(ManipulatorConfig{}));
  EXPECT_EQ(config_hash(ManipulatorConfig{}).size(), 16u);
}

TEST(Json, ConfigPartialAndInvalid) {
  const auto c = config_from_json(R"({"disk_mass_g": 20})");
  EXPECT_EQ(c.disk_mass_g, 20.0);
  EXPECT_EQ(c.backbone_length_mm, 560.0);
  for (const char* bad : {R"({"disk_mas_g": 20})", "{", R"({"n_disks": 1})", R"({"disk_mass_g": "x"})"}) {
    EXPECT_THROW(config_from_json(bad), Error) << bad;
  }
  try {
    config_from_json(R"({"bogus": 1})");
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    EXPECT_NE(std::string(e.what()).find("bogus"), std::string::npos);
  }
}

TEST(Json, ActuationRoundTripAndBounds) {
  const ActuationState a(100, rtdcm::testing::angles({{5, -70}, {8, 12}}));
  EXPECT_EQ(actuation_from_json(actuation_to_json(a)), a);
  EXPECT_THROW(actuation_from_json(R"({"tendon_mm": 150, "disk_angles_deg": [0,0,0,0,0,0,0,0,0]})"), Error);
  EXPECT_THROW(actuation_from_json(R"({"tendon_mm": 10, "disk_angles_deg": [0,0,0,0,95,0,0,0,0]})"), Error);
}

TEST(Json, NumbersUseNineSignificantDigits) {
  EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333");
  EXPECT_EQ(round_sig9(123.4567891234), 123.456789);
  SearchTrace t;
  t.evals = {{1.0 / 3.0, 2.0}};
  t.best_x = 1.0 / 3.0;
  t.best_f = 2.0;
  t.converged = true;
  const std::string j = trace_to_json(t);
  EXPECT_NE(j.find("0.333333333"), std::string::npos);
  EXPECT_EQ(j.find("0.3333333333"), std::string::npos);
}
