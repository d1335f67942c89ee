#include <gtest/gtest.h>

#include "json.hpp"

#include <random>

#include "cli_runner.hpp"
#include "dbscan_oracle.hpp"
#include "rtdcm/io.hpp"
#include "test_support.hpp"

using namespace rtdcm;
using namespace rtdcm::testing;
using nlohmann::json;

namespace {

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

bool single_error_line(const std::string& err, const std::string& code) {
  return err.rfind("ERROR " + code + ":", 0) == 0 && err.find('\n') == err.size() - 1;
}

}  // namespace

TEST(Cli, SimulateStraight) {
  const auto dir = scratch_dir("sim_straight");
  const auto r = run_cli(dir, "simulate --tendon-mm 0 --out-dir " + q(dir / "out"));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto centers = read_curve_csv(dir / "out" / "disk_centers.csv");
  ASSERT_EQ(centers.size(), 9u);
  for (const auto& c : centers) EXPECT_LT(std::hypot(c.x(), c.y()), 1e-6);
  const auto report = json::parse(slurp(dir / "out" / "report.json"));
  EXPECT_TRUE(report["converged"].get<bool>());
  const auto manifest = json::parse(slurp(dir / "out" / "manifest.json"));
  EXPECT_EQ(manifest["command"], "simulate");
  for (const auto& o : manifest["outputs"]) EXPECT_TRUE(fs::exists(o.get<std::string>())) << o;
}

TEST(Cli, SimulateRejectsOutOfBoundsAngle) {
  const auto dir = scratch_dir("sim_bounds");
  const auto r = run_cli(dir, "simulate --disk 5=-95 --out-dir " + q(dir / "out"));
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("90"), std::string::npos) << r.err;
  EXPECT_EQ(r.err.rfind("ERROR ", 0), 0u);
}

TEST(Cli, SimulateRejectsBadFlags) {
  const auto dir = scratch_dir("sim_flags");
  EXPECT_EQ(run_cli(dir, "simulate --disk 5:10").exit_code, 2);
  EXPECT_EQ(run_cli(dir, "simulate --tendon-mm 141").exit_code, 2);
  EXPECT_EQ(run_cli(dir, "simulate --disk 12=10").exit_code, 2);
  const auto r = run_cli(dir, "simulate --no-such-flag");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_TRUE(single_error_line(r.err, "InvalidArguments")) << r.err;
}

TEST(Cli, AnalyzePlanarAndTwisted) {
  const auto dir = scratch_dir("analyze");
  ASSERT_EQ(run_cli(dir, "simulate --tendon-mm 100 --out-dir " + q(dir / "planar")).exit_code, 0);
  auto r = run_cli(dir, "analyze " + q(dir / "planar" / "dense_curve.csv") + " --out-dir " + q(dir / "a1"));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_TRUE(json::parse(slurp(dir / "a1" / "sign_changes.json")).empty());
  EXPECT_TRUE(fs::exists(dir / "a1" / "profile.svg"));
  EXPECT_EQ(slurp(dir / "a1" / "profile.csv").rfind("s_mm,kappa_per_mm,tau_per_mm,valid,kappa_per_cm\n", 0), 0u);

  ASSERT_EQ(run_cli(dir, "simulate --tendon-mm 100 --disk 5=90 --out-dir " + q(dir / "twist")).exit_code, 0);
  r = run_cli(dir, "analyze " + q(dir / "twist" / "dense_curve.csv") + " --out-dir " + q(dir / "a2"));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto sc = json::parse(slurp(dir / "a2" / "sign_changes.json"));
  ASSERT_EQ(sc.size(), 1u);
  EXPECT_NEAR(sc[0]["nearest_disk"].get<int>(), 5, 1);
}

TEST(Cli, AnalyzeHelixAndMalformedCsv) {
  const auto dir = scratch_dir("analyze_helix");
  {
    std::ofstream f(dir / "helix.csv");
    write_curve_csv(f, helix_points(50, 20, 300));
  }
  ASSERT_EQ(run_cli(dir, "analyze " + q(dir / "helix.csv") + " --out-dir " + q(dir / "h")).exit_code, 0);
  {
    std::ofstream f(dir / "bad.csv");
    f << "x_mm,y_mm,z_mm\n1,2,3\n4,five,6\n";
  }
  const auto r = run_cli(dir, "analyze " + q(dir / "bad.csv") + " --out-dir " + q(dir / "b"));
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_TRUE(single_error_line(r.err, "ParseError")) << r.err;
  EXPECT_NE(r.err.find("row 3, column 2"), std::string::npos) << r.err;
}

TEST(Cli, ClusterSyntheticBlobs) {
  const auto dir = scratch_dir("cluster");
  std::mt19937_64 rng(5);
  const auto inst = synthetic_blobs(rng, 10, 12, 1.0, 0.0);
  {
    std::ofstream f(dir / "raw.csv");
    RawPointSet set;
    set.points = inst.points;
    set.disk_labels.assign(inst.points.size(), std::nullopt);
    write_raw_points_csv(f, set);
  }
  auto r = run_cli(dir, "cluster " + q(dir / "raw.csv") + " --expect 10 --out-dir " + q(dir / "c"));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(read_curve_csv(dir / "c" / "centroids.csv").size(), 10u);

  r = run_cli(dir, "cluster " + q(dir / "raw.csv") + " --eps 0.01 --expect 10 --out-dir " + q(dir / "d"));
  EXPECT_EQ(r.exit_code, 4);
  EXPECT_TRUE(single_error_line(r.err, "ClusterCountMismatch")) << r.err;

  r = run_cli(dir, "cluster " + q(dir / "raw.csv") + " --eps -1 --out-dir " + q(dir / "e"));
  EXPECT_EQ(r.exit_code, 2);

  { std::ofstream f(dir / "empty.csv"); }
  r = run_cli(dir, "cluster " + q(dir / "empty.csv") + " --out-dir " + q(dir / "f"));
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_EQ(r.err.rfind("ERROR ", 0), 0u);
}

TEST(Cli, SynthThenCluster) {
  const auto dir = scratch_dir("synth");
  ASSERT_EQ(run_cli(dir, "synth --tendon-mm 100 --disk 5=-70 --seed 3 --out-dir " + q(dir / "s")).exit_code, 0);
  const auto r = run_cli(dir, "cluster " + q(dir / "s" / "raw_points.csv") + " --expect 9 --out-dir " + q(dir / "c"));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto centroids = read_curve_csv(dir / "c" / "centroids.csv");
  const auto truth = simulate(100, {{5, -70}}).disk_curve().points();
  ASSERT_EQ(centroids.size(), truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) EXPECT_LT((centroids[i] - truth[i]).norm(), 2.0) << i;
}

TEST(Cli, MatchLoopClosureTarget) {
  const auto dir = scratch_dir("match");
  ASSERT_EQ(run_cli(dir, "simulate --tendon-mm 100 --disk 5=-70 --out-dir " + q(dir / "t")).exit_code, 0);
  const auto r = run_cli(dir, "match " + q(dir / "t" / "dense_curve.csv") + " --out-dir " + q(dir / "m"));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto j = json::parse(slurp(dir / "m" / "match_result.json"));
  ASSERT_EQ(j["hypotheses"].size(), 1u);
  const int disk = j["hypotheses"][0]["disk_index"].get<int>();
  EXPECT_GE(disk, 4);
  EXPECT_LE(disk, 6);
  EXPECT_EQ(j["hypotheses"][0]["direction"], "Counterclockwise");
  for (const char* f : {"step1_identify.svg", "step2_tendon.svg", "step4_tip.svg", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(dir / "m" / f)) << f;
  }
  EXPECT_TRUE(fs::exists(dir / "m" / ("step3_angle_" + std::to_string(disk) + ".svg")));
}

TEST(Cli, MatchStraightAndTruncated) {
  const auto dir = scratch_dir("match_straight");
  ASSERT_EQ(run_cli(dir, "simulate --tendon-mm 0 --out-dir " + q(dir / "t")).exit_code, 0);
  auto r = run_cli(dir, "match " + q(dir / "t" / "dense_curve.csv") + " --out-dir " + q(dir / "m"));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto j = json::parse(slurp(dir / "m" / "match_result.json"));
  EXPECT_TRUE(j["hypotheses"].empty());
  EXPECT_LE(j["tendon_mm"].get<double>(), 1.0);
  for (const auto& a : j["disk_angles_deg"]) EXPECT_LE(std::abs(a.get<double>()), 1.0);

  {
    std::ofstream f(dir / "short.csv");
    write_curve_csv(f, {Vec3(0, 0, 0), Vec3(0, 0, -10), Vec3(0, 0, -20), Vec3(0, 0, -30), Vec3(0, 0, -40)});
  }
  r = run_cli(dir, "match " + q(dir / "short.csv") + " --out-dir " + q(dir / "s"));
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_EQ(r.err.rfind("ERROR ", 0), 0u);
}

TEST(Cli, ManifestHashStable) {
  const auto dir = scratch_dir("manifest");
  ASSERT_EQ(run_cli(dir, "simulate --tendon-mm 40 --out-dir " + q(dir / "a")).exit_code, 0);
  ASSERT_EQ(run_cli(dir, "simulate --tendon-mm 40 --out-dir " + q(dir / "b")).exit_code, 0);
  const auto a = json::parse(slurp(dir / "a" / "manifest.json"));
  const auto b = json::parse(slurp(dir / "b" / "manifest.json"));
  EXPECT_EQ(a["config_hash"], b["config_hash"]);
  EXPECT_EQ(slurp(dir / "a" / "report.json"), slurp(dir / "b" / "report.json"));
}
