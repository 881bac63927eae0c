#include "ieg/core.hpp"

namespace ieg {

Point2 warp(Point2 p, const Pose2& pose) {
  return rotate({p.x - pose.tx, p.y - pose.ty}, -pose.r);
}

Point2 unwarp(Point2 q, const Pose2& pose) {
  const Point2 r = rotate(q, pose.r);
  return {r.x + pose.tx, r.y + pose.ty};
}

Jacobian23 warp_jacobian(Point2 p, const Pose2& pose) {
  // R(-r) = [c s; -s c] with c = cos r, s = sin r.
  const double c = std::cos(pose.r);
  const double s = std::sin(pose.r);
  const double dx = p.x - pose.tx;
  const double dy = p.y - pose.ty;
  // d/dr R(-r) = [-s c; -c -s]
  return {-c, -s, -s * dx + c * dy,
          s,  -c, -c * dx - s * dy};
}

Point2 advect(Point2 q, const Velocity2& v, double t) {
  const double theta = v.omega * t;
  // SE(2) left Jacobian V(theta) applied to the translational part.
  double a;
  double b;
  if (std::abs(theta) < 1e-8) {
    a = 1.0 - theta * theta / 6.0;
    b = theta / 2.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta;
  }
  const Point2 rq = rotate(q, theta);
  const double ux = v.vx * t;
  const double uy = v.vy * t;
  return {rq.x + a * ux - b * uy, rq.y + b * ux + a * uy};
}

Pose2 integrate(const Pose2& pose, const Velocity2& v, double t) {
  const Point2 origin = unwarp(advect({0.0, 0.0}, v, t), pose);
  return {origin.x, origin.y, pose.r + v.omega * t};
}

double wrap_angle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double w = std::remainder(a, kTwoPi);
  if (w <= -std::numbers::pi) w += kTwoPi;
  return w;
}

}  // namespace ieg
