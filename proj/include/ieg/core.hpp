#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace ieg {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Point2, Point2) = default;
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }

// Counter-clockwise rotation by `angle` in a y-down image frame.
inline Point2 rotate(Point2 p, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * p.x - s * p.y, s * p.x + c * p.y};
}

// Planar pose: translation in pixels, rotation in radians (stored unwrapped).
// Maps pattern-frame coordinates q to sensor coordinates R(r) q + t.
struct Pose2 {
  double tx = 0.0;
  double ty = 0.0;
  double r = 0.0;

  friend bool operator==(const Pose2&, const Pose2&) = default;
};

// Body-frame planar velocity: pixels/s and rad/s.
struct Velocity2 {
  double vx = 0.0;
  double vy = 0.0;
  double omega = 0.0;

  friend bool operator==(const Velocity2&, const Velocity2&) = default;
};

struct Event {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  int polarity = 1;

  friend bool operator==(const Event&, const Event&) = default;
};

struct WindowState {
  Pose2 pose;
  Velocity2 velocity;
  int iterations = 0;
  double final_loss = 0.0;
};

// 2x3 row-major Jacobian of a 2-D point with respect to (tx, ty, r).
using Jacobian23 = std::array<double, 6>;

// R(-T.r) (p - T.t): sensor point to pattern frame.
Point2 warp(Point2 p, const Pose2& pose);

// Inverse of warp: pattern frame to sensor point.
Point2 unwarp(Point2 q, const Pose2& pose);

// d warp / d(tx, ty, r), analytic.
Jacobian23 warp_jacobian(Point2 p, const Pose2& pose);

// Position after time t of a pattern-frame point q carried by the constant
// body twist v, expressed in the frame it started in.
Point2 advect(Point2 q, const Velocity2& v, double t);

// Pose reached after moving with constant body velocity v for time t.
Pose2 integrate(const Pose2& pose, const Velocity2& v, double t);

// Instantaneous body-frame velocity of pattern point q.
inline Point2 point_velocity(Point2 q, const Velocity2& v) {
  return {v.vx - v.omega * q.y, v.vy + v.omega * q.x};
}

// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

}  // namespace ieg
