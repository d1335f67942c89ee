#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rtdcm/error.hpp"
#include "rtdcm/optimize.hpp"
#include "test_support.hpp"

using namespace rtdcm;

namespace {

std::size_t rho_bound(double tol, double width) {
  return 2 + static_cast<std::size_t>(std::ceil(std::log(tol / width) / std::log(kGoldenRatio)));
}

double brute_force_argmin(const std::function<double(double)>& f, double lo, double hi, double step) {
  double best_x = lo;
  double best_f = f(lo);
  for (double x = lo + step; x <= hi + 1e-9; x += step) {
    if (f(x) < best_f) {
      best_f = f(x);
      best_x = x;
    }
  }
  return best_x;
}

}  // namespace

TEST(GoldenSection, QuadraticMinimum) {
  GoldenSearchSpec spec;
  spec.lo = 0;
  spec.hi = 5;
  spec.tol = 1e-6;
  const auto t = golden_section([](double x) { return (x - 2) * (x - 2); }, spec);
  EXPECT_TRUE(t.converged);
  EXPECT_NEAR(t.best_x, 2.0, 1e-6);
  EXPECT_LE(t.evals.size(), rho_bound(1e-6, 5.0));
  EXPECT_GE(t.evals.size(), 30u);
}

TEST(GoldenSection, QuantizedMatchesBruteForce) {
  GoldenSearchSpec spec;
  spec.lo = 0;
  spec.hi = 90;
  spec.tol = 1;
  spec.quantize = 1.0;
  auto f = [](double x) { return (x - 78.3) * (x - 78.3); };
  const auto t = golden_section(f, spec);
  EXPECT_DOUBLE_EQ(t.best_x, 78.0);
  for (const auto& e : t.evals) EXPECT_EQ(e.x, std::round(e.x));
  // Memoized: no grid point evaluated twice.
  for (std::size_t i = 0; i < t.evals.size(); ++i) {
    for (std::size_t j = i + 1; j < t.evals.size(); ++j) EXPECT_NE(t.evals[i].x, t.evals[j].x);
  }
}

TEST(GoldenSection, ConstantObjective) {
  GoldenSearchSpec spec;
  spec.lo = -3;
  spec.hi = 7;
  spec.tol = 1e-3;
  const auto t = golden_section([](double) { return 4.5; }, spec);
  EXPECT_EQ(t.best_f, 4.5);
  EXPECT_GE(t.best_x, -3.0);
  EXPECT_LE(t.best_x, 7.0);
}

TEST(GoldenSection, RandomQuadraticsRespectRhoBound) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-100, 100);
  for (int k = 0; k < 20; ++k) {
    double lo = u(rng);
    double hi = u(rng);
    if (lo > hi) std::swap(lo, hi);
    hi += 1.0;
    const double c = lo + (hi - lo) * std::uniform_real_distribution<double>(0, 1)(rng);
    const double tol = std::pow(10.0, -std::uniform_real_distribution<double>(1, 6)(rng));
    GoldenSearchSpec spec;
    spec.lo = lo;
    spec.hi = hi;
    spec.tol = tol;
    const auto t = golden_section([c](double x) { return 3.0 * (x - c) * (x - c) + 1.0; }, spec);
    EXPECT_NEAR(t.best_x, c, tol);
    EXPECT_LE(t.evals.size(), rho_bound(tol, hi - lo));
    // Nested brackets shrinking by rho.
    for (std::size_t i = 1; i < t.brackets.size(); ++i) {
      const auto [a0, b0] = t.brackets[i - 1];
      const auto [a1, b1] = t.brackets[i];
      EXPECT_GE(a1, a0);
      EXPECT_LE(b1, b0);
      EXPECT_NEAR((b1 - a1) / (b0 - a0), kGoldenRatio, 1e-9);
    }
  }
}

TEST(GoldenSection, UnimodalFunctionsMatchDenseGrid) {
  const std::vector<std::function<double(double)>> fs{
      [](double x) { return std::abs(x - 13.7); },
      [](double x) { return -std::exp(-std::pow((x - 61.2) / 8.0, 2)); },
      [](double x) { return std::pow(x - 44.4, 4); },
  };
  for (const auto& f : fs) {
    GoldenSearchSpec spec;
    spec.lo = 0;
    spec.hi = 90;
    spec.tol = 1e-4;
    const auto cont = golden_section(f, spec);
    EXPECT_NEAR(cont.best_x, brute_force_argmin(f, 0, 90, 1e-4), 1e-4);
    spec.quantize = 1.0;
    spec.tol = 1.0;
    const auto q = golden_section(f, spec);
    EXPECT_DOUBLE_EQ(q.best_x, brute_force_argmin(f, 0, 90, 1.0));
  }
}

TEST(GoldenSection, EntryPointEvaluatedFirst) {
  GoldenSearchSpec spec;
  spec.lo = 0;
  spec.hi = 90;
  spec.tol = 1;
  spec.quantize = 1.0;
  spec.entry = 90.0;
  const auto t = golden_section([](double x) { return (x - 30) * (x - 30); }, spec);
  ASSERT_FALSE(t.evals.empty());
  EXPECT_EQ(t.evals.front().x, 90.0);
  EXPECT_LE(t.best_f, t.evals.front().f);
  EXPECT_EQ(t.best_x, 30.0);
}

TEST(GoldenSection, BudgetExceeded) {
  GoldenSearchSpec spec;
  spec.lo = 0;
  spec.hi = 1;
  spec.tol = 1e-12;
  spec.max_evals = 5;
  const auto t = golden_section([](double x) { return x * x; }, spec);
  EXPECT_TRUE(t.budget_exceeded);
  EXPECT_FALSE(t.converged);
  EXPECT_EQ(t.evals.size(), 5u);
  double m = t.evals[0].f;
  for (const auto& e : t.evals) m = std::min(m, e.f);
  EXPECT_EQ(t.best_f, m);
}

TEST(GoldenSection, InvalidBracket) {
  auto f = [](double x) { return x; };
  for (auto mutate : std::vector<std::function<void(GoldenSearchSpec&)>>{
           [](GoldenSearchSpec& s) { s.lo = 2; s.hi = 1; },
           [](GoldenSearchSpec& s) { s.tol = 0; },
           [](GoldenSearchSpec& s) { s.quantize = 5.0; },
           [](GoldenSearchSpec& s) { s.entry = 2.0; },
       }) {
    GoldenSearchSpec spec;
    mutate(spec);
    try {
      golden_section(f, spec);
      ADD_FAILURE();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidBracket);
    }
  }
}

TEST(Metrics, ShapeRmseExamples) {
  std::vector<Vec3> a;
  for (int i = 0; i < 10; ++i) a.emplace_back(i, 2 * i, -70 * i);
  EXPECT_EQ(rmse_shape(a, a, 0, 9), 0.0);
  std::vector<Vec3> b = a;
  for (auto& p : b) p += Vec3(3, 4, 0);
  EXPECT_NEAR(rmse_shape(a, b, 0, 9), 0.5, 1e-12);
  std::vector<Vec3> c = a;
  c[5] += Vec3(10, 0, 0);
  EXPECT_EQ(rmse_shape(a, c, 7, 9), 0.0);
  EXPECT_NEAR(rmse_shape(a, c, 5, 5), 1.0, 1e-12);
  for (auto [lo, hi] : {std::pair{-1, 3}, std::pair{4, 3}, std::pair{0, 10}}) {
    try {
      rmse_shape(a, b, lo, hi);
      ADD_FAILURE();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::IndexRangeInvalid);
    }
  }
}

TEST(Metrics, ShapeRmseIsAMetric) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> n(0, 20);
  auto random_shape = [&] {
    std::vector<Vec3> s;
    for (int i = 0; i < 10; ++i) s.emplace_back(n(rng), n(rng), n(rng));
    return s;
  };
  for (int k = 0; k < 50; ++k) {
    const auto a = random_shape();
    const auto b = random_shape();
    const auto c = random_shape();
    EXPECT_DOUBLE_EQ(rmse_shape(a, b, 0, 9), rmse_shape(b, a, 0, 9));
    EXPECT_GT(rmse_shape(a, b, 0, 9), 0.0);
    EXPECT_LE(rmse_shape(a, c, 0, 9), rmse_shape(a, b, 0, 9) + rmse_shape(b, c, 0, 9) + 1e-12);
  }
}

TEST(Metrics, CurvatureRmse) {
  CTProfile a;
  for (int i = 0; i <= 100; ++i) {
    a.s.push_back(5.6 * i);
    a.kappa.push_back(0.002 + 0.001 * std::sin(i / 10.0));
    a.tau.push_back(0);
    a.kappa_valid.push_back(true);
  }
  EXPECT_EQ(rmse_curvature(a, a), 0.0);
  CTProfile b = a;
  for (double& k : b.kappa) k += 0.001;
  EXPECT_NEAR(rmse_curvature(a, b), 0.01, 1e-12);
  CTProfile far = a;
  for (double& s : far.s) s += 1000.0;
  try {
    rmse_curvature(a, far);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyOverlap);
  }
}

TEST(Metrics, TipError) {
  std::vector<Vec3> a(10, Vec3::Zero());
  std::vector<Vec3> b = a;
  EXPECT_EQ(tip_error(a, b), 0.0);
  b.back() = Vec3(0, 0, 8);
  EXPECT_DOUBLE_EQ(tip_error(a, b), 8.0);
  b.back() = Vec3(6, 0, 8);
  EXPECT_DOUBLE_EQ(tip_error(a, b), 10.0);
}
