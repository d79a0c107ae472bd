#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "lbvs/error.hpp"
#include "lbvs/printhead.hpp"
#include "support.hpp"

using namespace lbvs;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<NozzleSample> line_trace(const Vec2& a, const Vec2& b, int n) {
  std::vector<NozzleSample> out;
  for (int i = 0; i <= n; ++i) out.push_back({double(i), a + (b - a) * (double(i) / n), true});
  return out;
}

// y = amp * sin(2 pi x / wavelength) on [0, length], finely sampled.
std::vector<NozzleSample> wavy_trace(double amp, double wavelength, double length, int n) {
  std::vector<NozzleSample> out;
  for (int i = 0; i <= n; ++i) {
    const double x = length * i / n;
    out.push_back({double(i), {x, amp * std::sin(2.0 * kPi * x / wavelength)}, true});
  }
  return out;
}

Polyline polyline_of(const std::vector<NozzleSample>& trace) {
  Polyline p;
  for (const auto& s : trace) p.points.push_back(s.position);
  return p;
}

}  // namespace

TEST(Nozzle, PositionFromJointAndHeading) {
  const ArmState arm{-kPi / 2, 0.03, 1.0};
  const Vec2 n = nozzle_position(Pose2(1.0, 2.0, kPi / 2), arm);
  EXPECT_NEAR(n.x(), 1.03, 1e-15);
  EXPECT_NEAR(n.y(), 2.0, 1e-15);
}

TEST(Nozzle, CompensationClampsToJointLimit) {
  EXPECT_EQ(compensate_rotation(0.04, 1.0).rate, -0.04);
  EXPECT_FALSE(compensate_rotation(0.04, 1.0).clamped);
  const JointRate r = compensate_rotation(-2.0, 1.0);
  EXPECT_EQ(r.rate, 1.0);
  EXPECT_TRUE(r.clamped);
}

TEST(Nozzle, PivotWithCompensationKeepsNozzleFixed) {
  test::Gen gen(1);
  for (int trial = 0; trial < 100; ++trial) {
    Pose2 chassis = gen.pose(1.0, kPi);
    ArmState arm{gen.uniform(-kPi, kPi), gen.uniform(0.01, 0.2), 1.0};
    const double omega = gen.uniform(-0.05, 0.05);
    const double dt = trial % 2 ? 0.5 : 0.01;
    const Vec2 start = nozzle_position(chassis, arm);
    double max_drift = 0.0;
    for (double t = 0.0; t < 10.0 - 1e-9; t += dt) {
      arm.joint_angle += compensate_rotation(omega, arm.joint_rate_max).rate * dt;
      chassis = step_unicycle(chassis, {0.0, omega}, dt);
      max_drift = std::max(max_drift, (nozzle_position(chassis, arm) - start).norm());
    }
    EXPECT_LT(max_drift, 1e-9);
  }
}

TEST(Deposit, SplitsStrandsAndSubdivides) {
  std::vector<NozzleSample> trace = line_trace({0, 0}, {0.01, 0}, 2);
  trace.push_back({3.0, {0.02, 0}, false});
  trace.push_back({4.0, {0.03, 0}, true});
  trace.push_back({5.0, {0.04, 0}, true});
  const BeadRibbon r = deposit(trace, 0.002, 0.002);
  ASSERT_EQ(r.strands.size(), 2u);
  EXPECT_EQ(r.strands[0].points.size(), 7u);  // two 5 mm steps, three pieces each
  EXPECT_EQ(r.strands[1].points.size(), 6u);  // one 10 mm step in 2 mm pieces
  EXPECT_DOUBLE_EQ(r.strands[0].times[2], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.strands[0].points[2].x(), 0.01 / 3.0);
  EXPECT_EQ(r.segment_count(), 11u);
}

TEST(Deposit, RejectsBadInput) {
  EXPECT_THROW(deposit(line_trace({0, 0}, {1, 0}, 1), 0.0), Error);
  const std::vector<NozzleSample> one{{0.0, {0, 0}, true}};
  EXPECT_THROW(deposit(one, 0.002), Error);
}

TEST(Polyline, LengthAndCorners) {
  Polyline square;
  square.points = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  square.closed = true;
  EXPECT_DOUBLE_EQ(square.length(), 4.0);
  EXPECT_EQ(square.corners().size(), 4u);
  Polyline open = square;
  open.closed = false;
  EXPECT_DOUBLE_EQ(open.length(), 3.0);
  EXPECT_EQ(open.corners().size(), 2u);
  Polyline straight;
  straight.points = {{0, 0}, {1, 0}, {2, 0}};
  EXPECT_TRUE(straight.corners().empty());
}

TEST(Thickness, SingleBeadIsItsWidth) {
  const BeadRibbon r = deposit(line_trace({0, 0}, {0.1, 0}, 10), 0.002);
  EXPECT_NEAR(thickness_at(r, {0.05, 0.0}, {0, 1}, 0.008), 0.002, 1e-15);
  EXPECT_NEAR(thickness_at(r, {0.05, 0.0005}, {0, 1}, 0.008), 0.002, 1e-15);
  EXPECT_EQ(thickness_at(r, {0.05, 0.02}, {0, 1}, 0.008), 0.0);
}

TEST(Thickness, ObliqueCutOfABand) {
  // A line crossing a band of width w at angle alpha to its normal covers
  // w / cos(alpha).
  const BeadRibbon r = deposit(line_trace({-0.1, 0}, {0.1, 0}, 20), 0.002);
  test::Gen gen(2);
  for (int i = 0; i < 100; ++i) {
    const double alpha = gen.uniform(-1.2, 1.2);
    const Vec2 n(std::sin(alpha), std::cos(alpha));
    EXPECT_NEAR(thickness_at(r, {gen.uniform(-0.05, 0.05), 0.0}, n, 0.02), 0.002 / std::cos(alpha), 1e-12);
  }
}

TEST(Thickness, ParallelPassesMergeOrSeparate) {
  test::Gen gen(3);
  for (int i = 0; i < 100; ++i) {
    const double d = gen.uniform(0.0, 0.004);
    std::vector<NozzleSample> trace = line_trace({0, 0}, {0.1, 0}, 10);
    for (const auto& s : line_trace({0.1, d}, {0, d}, 10)) trace.push_back(s);
    const BeadRibbon r = deposit(trace, 0.002);
    const double expected = d < 0.002 ? 0.002 + d : 0.004;
    EXPECT_NEAR(thickness_at(r, {0.05, 0.0}, {0, 1}, 0.008), expected, 1e-12) << "d = " << d;
  }
}

TEST(WallStats, MultiPassWallHasUniformThickness) {
  const auto trace = multi_pass_trace({0, 0}, {0.05, 0}, 3, 0.0005);
  const BeadRibbon r = deposit(trace, 0.002);
  Polyline ref;
  ref.points = {{0, 0}, {0.05, 0}};
  const WallStats s = wall_thickness_stats(r, ref);
  EXPECT_EQ(s.gap_count, 0);
  // Samples at 2 mm spacing, ends within 8 mm skipped.
  EXPECT_EQ(s.samples, 18);
  EXPECT_NEAR(s.mean_mm, 3.0, 1e-9);
  EXPECT_EQ(s.stdev_mm, 0.0);
}

TEST(WallStats, UncoveredSamplesAreGaps) {
  const BeadRibbon r = deposit(line_trace({0, 0}, {0.03, 0}, 5), 0.002);
  Polyline ref;
  ref.points = {{0, 0}, {0.061, 0}};
  const WallStats s = wall_thickness_stats(r, ref);
  EXPECT_GT(s.gap_count, 0);
  // Samples at 8, 10, ..., 52 mm.
  EXPECT_EQ(s.samples + s.gap_count, 23);
  EXPECT_THROW(wall_thickness_stats(BeadRibbon{}, ref), Error);
}

TEST(WallStats, StdevIsPopulationStdev) {
  // Two passes whose spacing steps halfway: thickness 2.5 mm then 3.0 mm.
  std::vector<NozzleSample> trace = line_trace({0, 0}, {0.1, 0}, 50);
  std::vector<NozzleSample> second = line_trace({0.1, 0.001}, {0.05, 0.001}, 25);
  for (auto& s : second) s.t += 100;
  trace.insert(trace.end(), second.begin(), second.end());
  std::vector<NozzleSample> third = line_trace({0.05, 0.0005}, {0.0, 0.0005}, 25);
  for (auto& s : third) s.t += 200;
  trace.push_back({150.0, {0.05, 0.001}, false});
  trace.insert(trace.end(), third.begin(), third.end());
  const BeadRibbon r = deposit(trace, 0.002);
  Polyline ref;
  ref.points = {{0, 0}, {0.1, 0}};
  const WallStats s = wall_thickness_stats(r, ref, {0.002, 0.008, 0.012});
  double sum = 0.0, sq = 0.0;
  for (double t : s.thickness_mm) sum += t;
  const double mean = sum / s.samples;
  for (double t : s.thickness_mm) sq += (t - mean) * (t - mean);
  EXPECT_NEAR(s.stdev_mm, std::sqrt(sq / s.samples), 1e-12);
  EXPECT_GT(s.stdev_mm, 0.2);
}

TEST(Raster, WavyRibbonAreaMatchesAnalyticArea) {
  // Open strand with curvature radius well above the bead radius: area is
  // length * width plus the two half-disc end caps.
  test::Gen gen(4);
  for (int trial = 0; trial < 10; ++trial) {
    const double amp = gen.uniform(0.0, 0.004);
    const double wavelength = gen.uniform(0.03, 0.06);
    const auto trace = wavy_trace(amp, wavelength, 0.1, 2000);
    const BeadRibbon r = deposit(trace, 0.002);
    const double analytic = polyline_of(trace).length() * 0.002 + kPi * 0.001 * 0.001;
    EXPECT_NEAR(ribbon_area(r), analytic, 0.05 * analytic) << "trial " << trial;
    EXPECT_NEAR(ribbon_area(r), analytic, 0.01 * analytic) << "trial " << trial;
  }
}

TEST(Raster, ThicknessIntegralAgreesWithRasterArea) {
  // Mean normal thickness times length against the rasterized area, on
  // wavy walls of varying width.
  test::Gen gen(5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto trace = wavy_trace(gen.uniform(0.0, 0.003), gen.uniform(0.04, 0.08), 0.12, 3000);
    const double width = gen.uniform(0.001, 0.003);
    const BeadRibbon r = deposit(trace, width);
    const Polyline ref = polyline_of(trace);
    const WallStats s = wall_thickness_stats(r, ref, {0.0005, 0.008, 0.0});
    ASSERT_EQ(s.gap_count, 0);
    const double integral = 1e-3 * s.mean_mm * ref.length();
    EXPECT_NEAR(integral, ribbon_area(r, 2e-5), 0.05 * integral) << "trial " << trial;
  }
}

TEST(Raster, CapsuleCellsAreInsideTheCapsule) {
  CoverageRaster raster = CoverageRaster::spanning({-0.01, -0.01}, {0.01, 0.01}, 2e-4);
  raster.add_capsule({-0.005, 0.0}, {0.005, 0.002}, 0.001);
  for (int iy = 0; iy < raster.ny(); ++iy) {
    for (int ix = 0; ix < raster.nx(); ++ix) {
      const Vec2 p = raster.center(ix, iy);
      const Vec2 a(-0.005, 0.0), b(0.005, 0.002);
      const double s = std::clamp((p - a).dot(b - a) / (b - a).squaredNorm(), 0.0, 1.0);
      EXPECT_EQ(raster.at(ix, iy), (p - (a + s * (b - a))).norm() <= 0.001 + 1e-15);
    }
  }
  EXPECT_THROW(CoverageRaster({0, 0}, 0.0, 1, 1), Error);
}

TEST(CornerOverDeposit, ExactPathHasNone) {
  Polyline ref;
  ref.points = {{-0.02, 0.0}, {0.0, 0.0}, {0.0, 0.02}};
  std::vector<NozzleSample> trace = line_trace({-0.02, 0.0}, {0.0, 0.0}, 10);
  for (const auto& s : line_trace({0.0, 0.0}, {0.0, 0.02}, 10)) trace.push_back({s.t + 11, s.position, true});
  const auto over = corner_over_deposit(deposit(trace, 0.002), ref, 0.01);
  ASSERT_EQ(over.size(), 1u);
  EXPECT_EQ(over[0], 0.0);
}

TEST(CornerOverDeposit, OvershootArea) {
  // Bead overshoots the corner by 5 mm. Outside the designed band: the 5 x 2
  // mm strip plus its end cap, minus the part of the outgoing leg's band
  // (1 x 1 mm) and the quarter disc at the corner.
  Polyline ref;
  ref.points = {{-0.02, 0.0}, {0.0, 0.0}, {0.0, 0.02}};
  const BeadRibbon r = deposit(line_trace({-0.02, 0.0}, {0.005, 0.0}, 25), 0.002);
  const double expected = 5.0 * 2.0 + kPi / 2.0 - 1.0 - kPi / 4.0;
  const auto over = corner_over_deposit(r, ref, 0.01, 2e-5);
  ASSERT_EQ(over.size(), 1u);
  EXPECT_NEAR(over[0], expected, 0.02 * expected);
}
