#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "kfbi/errors.hpp"
#include "kfbi/geometry.hpp"

using namespace kfbi;

namespace {

constexpr double pi = std::numbers::pi;

Curve star3() { return Curve::star(1.0, 0.2, 3); }

}  // namespace

TEST(Curve, UnitCircleAtZero) {
  const CurvePoint p = Curve::circle(1.0).evaluate(0.0);
  EXPECT_NEAR(p.position.x, 1.0, 1e-15);
  EXPECT_NEAR(p.position.y, 0.0, 1e-15);
  EXPECT_NEAR(p.tangent.x, 0.0, 1e-15);
  EXPECT_NEAR(p.tangent.y, 1.0, 1e-15);
  EXPECT_NEAR(p.normal.x, 1.0, 1e-15);
  EXPECT_NEAR(p.normal.y, 0.0, 1e-15);
  // Curvature 1: dt/ds points inward with unit length.
  EXPECT_NEAR(p.dtangent_ds.x, -1.0, 1e-14);
  EXPECT_NEAR(p.dtangent_ds.y, 0.0, 1e-14);
}

TEST(Curve, FramesAreOrthonormal) {
  const std::vector<Curve> curves{Curve::circle(1.0), Curve::ellipse(1.0, 0.5), star3(),
                                  Curve::spline({{1, 0}, {0.5, 0.8}, {-0.6, 0.7}, {-1, -0.1}, {-0.3, -0.9}, {0.7, -0.6}})};
  for (const Curve& c : curves) {
    for (int k = 0; k < 97; ++k) {
      const CurvePoint p = c.evaluate(0.37 + k * 0.0647);
      EXPECT_NEAR(norm(p.tangent), 1.0, 1e-14);
      EXPECT_NEAR(dot(p.tangent, p.normal), 0.0, 1e-14);
      // Outward normal for a counter-clockwise curve.
      EXPECT_LT(c.level_set(p.position - 1e-4 * p.normal), 0.0);
      EXPECT_GT(c.level_set(p.position + 1e-4 * p.normal), 0.0);
    }
  }
}

TEST(Curve, StarAtZero) {
  const CurvePoint p = star3().evaluate(0.0);
  EXPECT_NEAR(p.position.x, 1.0, 1e-15);
  EXPECT_NEAR(p.position.y, 0.0, 1e-15);
}

TEST(Curve, DerivativesMatchFiniteDifferences) {
  const Curve c = Curve::star(1.5, 0.2, 3, {0.1, -0.2});
  const double d = 1e-5;
  for (double th : {0.1, 1.0, 2.5, 4.0, 6.0}) {
    const CurvePoint p = c.evaluate(th);
    const Vec2 dr = (1.0 / (2 * d)) * (c.position(th + d) - c.position(th - d));
    EXPECT_NEAR(p.speed, norm(dr), 1e-8);
    const CurvePoint a = c.evaluate(th - d), b = c.evaluate(th + d);
    const Vec2 dt = (1.0 / (2 * d * p.speed)) * (b.tangent - a.tangent);
    EXPECT_NEAR(p.dtangent_ds.x, dt.x, 1e-7);
    EXPECT_NEAR(p.dtangent_ds.y, dt.y, 1e-7);
    EXPECT_NEAR(p.dspeed, (b.speed - a.speed) / (2 * d), 1e-7);
  }
}

TEST(Curve, RejectsBadParameters) {
  EXPECT_THROW(Curve::circle(0.0), GeometryError);
  EXPECT_THROW(Curve::ellipse(1.0, -1.0), GeometryError);
  EXPECT_THROW(Curve::star(1.0, 0.5, 3), GeometryError);
  EXPECT_THROW(Curve::star(1.0, 0.2, 0), GeometryError);
  EXPECT_THROW(Curve::spline({{0, 0}, {1, 0}, {1, 1}}), GeometryError);
  EXPECT_THROW(Curve::circle(1.0).evaluate(std::nan("")), GeometryError);
}

TEST(Curve, SplineReproducesCircleApproximately) {
  std::vector<Vec2> pts;
  for (int i = 0; i < 64; ++i) pts.push_back({std::cos(2 * pi * i / 64), std::sin(2 * pi * i / 64)});
  const Curve c = Curve::spline(pts);
  for (int k = 0; k < 50; ++k) {
    const double th = 0.123 * k;
    const CurvePoint p = c.evaluate(th);
    EXPECT_NEAR(norm(p.position), 1.0, 1e-6);
    EXPECT_NEAR(dot(p.normal, (1.0 / norm(p.position)) * p.position), 1.0, 1e-6);
  }
}

TEST(Curve, ClockwiseSplineIsReoriented) {
  std::vector<Vec2> pts;
  for (int i = 0; i < 32; ++i) pts.push_back({std::cos(-2 * pi * i / 32), 0.7 * std::sin(-2 * pi * i / 32)});
  const Curve c = Curve::spline(pts);
  const CurvePoint p = c.evaluate(0.5);
  EXPECT_GT(c.level_set(p.position + 1e-3 * p.normal), 0.0);
}

TEST(Curve, ParameterOfRoundTrips) {
  for (const Curve& c : {Curve::circle(0.8, {0.1, 0.2}), Curve::ellipse(1.0, 0.5), star3()}) {
    for (int k = 0; k < 40; ++k) {
      const double th = 0.157 * k;
      EXPECT_NEAR(c.parameter_of(c.position(th)), th, 1e-10);
    }
  }
}

TEST(ClassifyPoint, Basic) {
  const Curve circle = Curve::circle(1.0);
  EXPECT_EQ(classify_point(circle, {0, 0}), Region::interior);
  EXPECT_EQ(classify_point(circle, {1.1, 0}), Region::exterior);
  EXPECT_EQ(classify_point(star3(), {0, 0}), Region::interior);
  // Between the lobes the star radius is 0.6.
  EXPECT_EQ(classify_point(star3(), {0.7 * std::cos(pi / 3), 0.7 * std::sin(pi / 3)}), Region::exterior);
  // Points on the curve resolve to the interior.
  EXPECT_EQ(classify_point(circle, {1.0, 0.0}), Region::interior);
}

TEST(EdgeIntersection, CircleAxes) {
  const Curve c = Curve::circle(1.0);
  const EdgeCrossing a = edge_intersection(c, {0.9, 0}, {1.1, 0}, 0.2);
  EXPECT_NEAR(a.point.x, 1.0, 1e-13);
  EXPECT_NEAR(a.point.y, 0.0, 1e-15);
  EXPECT_NEAR(a.fraction, 0.5, 1e-12);
  const EdgeCrossing b = edge_intersection(c, {0, 0.9}, {0, 1.1}, 0.2);
  EXPECT_NEAR(b.point.x, 0.0, 1e-15);
  EXPECT_NEAR(b.point.y, 1.0, 1e-13);
  EXPECT_NEAR(b.theta, pi / 2, 1e-12);
  EXPECT_THROW(edge_intersection(c, {0, 0}, {0.5, 0}, 0.5), GeometryError);
}

TEST(EdgeIntersection, StarMatchesDenseScan) {
  // Scan y = 0.3 for sign changes of phi with 10^6 samples, then compare.
  const Curve c = star3();
  const double y = 0.3, xlo = 0.0, xhi = 1.2;
  const int samples = 1'000'000;
  double root = std::nan("");
  double prev = c.level_set({xlo, y});
  for (int s = 1; s <= samples; ++s) {
    const double x = xlo + (xhi - xlo) * s / samples;
    const double f = c.level_set({x, y});
    if ((prev < 0) != (f < 0)) {
      // Linear interpolation inside the sample bracket.
      const double x0 = x - (xhi - xlo) / samples;
      root = x0 + (x - x0) * prev / (prev - f);
      break;
    }
    prev = f;
  }
  ASSERT_FALSE(std::isnan(root));
  const double h = 0.05;
  const double a = std::floor(root / h) * h;
  const EdgeCrossing e = edge_intersection(c, {a, y}, {a + h, y}, h);
  EXPECT_NEAR(e.point.x, root, 1e-8);
  EXPECT_NEAR(c.level_set(e.point), 0.0, 1e-12);
}

TEST(DifferentiateDensity, ConstantIsExactlyZero) {
  const ControlPoints pts(star3(), 64);
  const std::vector<double> v(64, 3.7);
  const auto d = differentiate_density<double>(v, pts);
  for (std::size_t i = 0; i < 64; ++i) {
    EXPECT_EQ(d.ds[i], 0.0);
    EXPECT_EQ(d.dss[i], 0.0);
  }
}

TEST(DifferentiateDensity, FourthOrderOnCircle) {
  double prev = 0.0;
  for (int m : {32, 64, 128}) {
    const ControlPoints pts(Curve::circle(1.0), m);
    std::vector<double> v;
    for (const auto& z : pts) v.push_back(std::sin(z.theta));
    const auto d = differentiate_density<double>(v, pts);
    double err = 0.0, err2 = 0.0;
    for (const auto& z : pts) {
      err = std::max(err, std::abs(d.ds[z.index] - std::cos(z.theta)));
      err2 = std::max(err2, std::abs(d.dss[z.index] + std::sin(z.theta)));
    }
    EXPECT_LT(err, 0.1 * std::pow(2 * pi / m, 4) + 1e-13);
    EXPECT_LT(err2, 0.1 * std::pow(2 * pi / m, 4) + 1e-10);
    if (prev > 0.0) {
      EXPECT_GT(prev / err, 12.0);
    }
    prev = err;
  }
}

TEST(DifferentiateDensity, StarMatchesRefinedDifferences) {
  // Oracle: central differences in arc length on a parameter grid 64 times finer.
  const Curve c = star3();
  const int m = 256, fine = 64 * m;
  const ControlPoints pts(c, m);
  std::vector<double> v;
  for (const auto& z : pts) v.push_back(std::sin(2 * z.theta));
  const auto d = differentiate_density<double>(v, pts);
  const double dt = 2 * pi / fine;
  double err = 0.0, err2 = 0.0;
  for (const auto& z : pts) {
    const double th = z.theta;
    auto f = [](double t) { return std::sin(2 * t); };
    auto speed = [&](double t) { return c.evaluate(t).speed; };
    const double s0 = speed(th);
    const double ftheta = (f(th + dt) - f(th - dt)) / (2 * dt);
    const double fthth = (f(th + dt) - 2 * f(th) + f(th - dt)) / (dt * dt);
    const double sprime = (speed(th + dt) - speed(th - dt)) / (2 * dt);
    const double ds = ftheta / s0;
    const double dss = (fthth - sprime * ds) / (s0 * s0);
    err = std::max(err, std::abs(d.ds[z.index] - ds));
    err2 = std::max(err2, std::abs(d.dss[z.index] - dss));
  }
  EXPECT_LT(err, 1e-6);
  EXPECT_LT(err2, 1e-4);
}

TEST(DifferentiateDensity, RejectsBadSizes) {
  const ControlPoints pts(Curve::circle(1.0), 16);
  EXPECT_THROW(differentiate_density<double>(std::vector<double>(15), pts), ConfigError);
  EXPECT_THROW(ControlPoints(Curve::circle(1.0), 4), ConfigError);
}
