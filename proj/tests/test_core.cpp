#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "ieg/core.hpp"

using namespace ieg;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST(Warp, HandExamples) {
  EXPECT_EQ(warp({5, 3}, {0, 0, 0}), (Point2{5, 3}));
  EXPECT_EQ(warp({5, 3}, {2, 1, 0}), (Point2{3, 2}));
  const Point2 q = warp({1, 0}, {0, 0, kPi / 2});
  EXPECT_NEAR(q.x, 0.0, 1e-15);
  EXPECT_NEAR(q.y, -1.0, 1e-15);
}

TEST(WarpJacobian, HandExamples) {
  const Jacobian23 a = warp_jacobian({5, 3}, {0, 0, 0});
  EXPECT_EQ(a[0], -1.0);
  EXPECT_EQ(a[3], 0.0);
  const Jacobian23 b = warp_jacobian({1, 0}, {0, 0, 0});
  EXPECT_EQ(b[2], 0.0);
  EXPECT_EQ(b[5], -1.0);
}

TEST(WarpJacobian, MatchesFiniteDifferences) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> pos(-300, 300), ang(-7, 7);
  const double h = 1e-5;
  for (int trial = 0; trial < 500; ++trial) {
    const Point2 p{pos(rng), pos(rng)};
    const Pose2 T{pos(rng), pos(rng), ang(rng)};
    const Jacobian23 j = warp_jacobian(p, T);
    for (int c = 0; c < 3; ++c) {
      Pose2 tp = T, tm = T;
      double* fp[3] = {&tp.tx, &tp.ty, &tp.r};
      double* fm[3] = {&tm.tx, &tm.ty, &tm.r};
      *fp[c] += h;
      *fm[c] -= h;
      const Point2 a = warp(p, tp), b = warp(p, tm);
      EXPECT_NEAR(j[c], (a.x - b.x) / (2 * h), 1e-6) << "trial " << trial << " col " << c;
      EXPECT_NEAR(j[3 + c], (a.y - b.y) / (2 * h), 1e-6) << "trial " << trial << " col " << c;
    }
  }
}

TEST(Warp, InverseAndIsometry) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> pos(-500, 500), ang(-10, 10);
  for (int trial = 0; trial < 1000; ++trial) {
    const Point2 a{pos(rng), pos(rng)}, b{pos(rng), pos(rng)};
    const Pose2 T{pos(rng), pos(rng), ang(rng)};
    const Point2 back = unwarp(warp(a, T), T);
    EXPECT_NEAR(back.x, a.x, 1e-9);
    EXPECT_NEAR(back.y, a.y, 1e-9);
    EXPECT_NEAR(norm(warp(a, T) - warp(b, T)), norm(a - b), 1e-9);
  }
}

TEST(Motion, AdvectIsTheFlowOfThePointVelocity) {
  // Body twist: d/dt p = R(omega t) (v + omega x q) = omega x (p - origin(t)) + R(omega t) v.
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> pos(-40, 40), vel(-400, 400), om(-5, 5), tt(0, 0.05);
  for (int trial = 0; trial < 200; ++trial) {
    const Point2 q{pos(rng), pos(rng)};
    const Velocity2 v{vel(rng), vel(rng), om(rng)};
    const double t = tt(rng);
    const double h = 1e-6;
    const Point2 d = (1.0 / (2 * h)) * (advect(q, v, t + h) - advect(q, v, t - h));
    const Point2 rel = advect(q, v, t) - advect({0, 0}, v, t);
    const Point2 expect =
        point_velocity(rel, {0, 0, v.omega}) + rotate({v.vx, v.vy}, v.omega * t);
    EXPECT_NEAR(d.x, expect.x, 1e-4);
    EXPECT_NEAR(d.y, expect.y, 1e-4);
  }
}

TEST(Motion, IntegrateAgreesWithAdvect) {
  // A pattern point seen through the integrated pose sits where advect puts it.
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> pos(-40, 40), vel(-400, 400), om(-5, 5), tt(0, 0.05),
      ang(-3, 3);
  for (int trial = 0; trial < 200; ++trial) {
    const Pose2 T{pos(rng) + 100, pos(rng) + 100, ang(rng)};
    const Velocity2 v{vel(rng), vel(rng), om(rng)};
    const Point2 q{pos(rng), pos(rng)};
    const double t = tt(rng);
    const Point2 a = unwarp(q, integrate(T, v, t));
    const Point2 b = unwarp(advect(q, v, t), T);
    EXPECT_NEAR(a.x, b.x, 1e-9);
    EXPECT_NEAR(a.y, b.y, 1e-9);
  }
}

TEST(Motion, IntegrateComposes) {
  const Pose2 T{10, -4, 0.3};
  const Velocity2 v{120, -80, 2.5};
  const Pose2 a = integrate(integrate(T, v, 0.013), v, 0.021);
  const Pose2 b = integrate(T, v, 0.034);
  EXPECT_NEAR(a.tx, b.tx, 1e-10);
  EXPECT_NEAR(a.ty, b.ty, 1e-10);
  EXPECT_NEAR(a.r, b.r, 1e-12);
}

TEST(Angles, WrapRange) {
  EXPECT_DOUBLE_EQ(wrap_angle(0.0), 0.0);
  EXPECT_DOUBLE_EQ(wrap_angle(kPi), kPi);
  EXPECT_DOUBLE_EQ(wrap_angle(-kPi), kPi);
  EXPECT_NEAR(wrap_angle(2 * kPi + 0.25), 0.25, 1e-15);
  EXPECT_NEAR(wrap_angle(-7 * kPi / 2), kPi / 2, 1e-14);
}
