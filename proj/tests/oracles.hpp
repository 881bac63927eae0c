#pragma once

// Independent reference evaluations shared by the unit tests and the
// acceptance runner. Nothing here calls the library's own gradient code.

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "ieg/core.hpp"
#include "ieg/model.hpp"
#include "ieg/synth.hpp"
#include "ieg/tracker.hpp"
#include "test_util.hpp"

namespace ieg::oracle {

// Scalar transcriptions of the event-formation formulas.
inline double delta(double gx, double gy, double xe, double ye, double vx, double vy,
                    double omega, double t, bool paper_literal) {
  const double c = std::cos(omega * t);
  const double s = std::sin(omega * t);
  const double rgx = c * gx - s * gy;
  const double rgy = s * gx + c * gy;
  double ux, uy;
  if (paper_literal) {
    ux = vx + std::cos(omega);
    uy = vy + std::sin(omega);
  } else {
    ux = vx - omega * ye;
    uy = vy + omega * xe;
  }
  return (rgx * ux + rgy * uy) * t;
}

inline int quantize(double d, double bar) {
  if (d > bar) return 1;
  if (d < -bar) return -1;
  return 0;
}

inline double blur(int q, double dx, double dy, double sigma, double w) {
  const double r2 = dx * dx + dy * dy;
  if (std::sqrt(r2) > w) return 0.0;
  return q * std::exp(-r2 / (2.0 * sigma * sigma));
}

// Plain nested-loop forward pass, no fused multiply-adds.
inline double forward(const IegModel& m, const Input6& x) {
  const auto& n = m.normalization();
  std::vector<double> a(6);
  for (int i = 0; i < 6; ++i) a[i] = (x[i] - n.offset[i]) / n.scale[i];
  for (int l = 0; l < m.layer_count(); ++l) {
    const int in = m.dims()[l];
    const int out = m.dims()[l + 1];
    std::vector<double> z(out);
    for (int o = 0; o < out; ++o) {
      double acc = m.bias(l)[o];
      for (int i = 0; i < in; ++i) acc += m.weights(l)[o * in + i] * a[i];
      z[o] = m.activation() == Activation::kTanh ? std::tanh(acc) : acc / std::sqrt(1.0 + acc * acc);
    }
    a = std::move(z);
  }
  return a[0];
}

// Worst per-component relative error of `analytic` against `numeric`, where
// components far below the largest one are compared on that larger scale.
inline double relative_error(std::span<const double> analytic, std::span<const double> numeric) {
  double scale = 0.0;
  for (double v : analytic) scale = std::max(scale, std::abs(v));
  const double floor = std::max(1e-3 * scale, 1e-12);
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric[i]), floor});
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / denom);
  }
  return worst;
}

// Central differences of the model output in each raw input coordinate, with
// a step of 1e-4 in normalized units.
inline Input6 fd_grad_input(const IegModel& m, const Input6& x) {
  Input6 g{};
  for (int i = 0; i < 6; ++i) {
    const double h = 1e-4 * m.normalization().scale[i];
    Input6 p = x, q = x;
    p[i] += h;
    q[i] -= h;
    g[i] = (oracle::forward(m, p) - oracle::forward(m, q)) / (2.0 * h);
  }
  return g;
}

// Central differences of (forward - target)^2 in every parameter, h = 1e-4.
inline std::vector<double> fd_grad_weights(IegModel m, const TrainingSample& s) {
  std::vector<double> g(m.param_count());
  auto params = m.params();
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double saved = params[k];
    params[k] = saved + 1e-4;
    const double ep = oracle::forward(m, s.input) - s.target;
    params[k] = saved - 1e-4;
    const double em = oracle::forward(m, s.input) - s.target;
    params[k] = saved;
    g[k] = (ep * ep - em * em) / 2e-4;
  }
  return g;
}

// Loss assembled term by term from warp and the plain forward pass.
inline double window_loss(const IegModel& m, std::span<const Event> ev, const Pose2& T,
                          const Velocity2& V, PolarityMode mode) {
  const auto& n = m.normalization();
  double sum = 0.0;
  for (const Event& e : ev) {
    const Point2 q = warp({e.x, e.y}, T);
    const double t = std::clamp(e.t - ev.front().t, n.lower(2), n.upper(2));
    const double g = oracle::forward(m, {q.x, q.y, t, V.vx, V.vy, V.omega});
    sum += mode == PolarityMode::kIgnore ? 1.0 - std::abs(g) : (e.polarity - g) * (e.polarity - g);
  }
  return sum;
}

// Central differences of the library's window_loss: h = 1e-5 on the pose,
// 1e-3 on the velocity.
inline std::array<double, 6> fd_window_grad(const IegModel& m, std::span<const Event> ev,
                                            const Pose2& T, const Velocity2& V,
                                            const TrackerConfig& cfg) {
  std::array<double, 6> g{};
  for (int c = 0; c < 6; ++c) {
    const double h = c < 3 ? 1e-5 : 1e-3;
    Pose2 tp = T, tm = T;
    Velocity2 vp = V, vm = V;
    double* fp[6] = {&tp.tx, &tp.ty, &tp.r, &vp.vx, &vp.vy, &vp.omega};
    double* fm[6] = {&tm.tx, &tm.ty, &tm.r, &vm.vx, &vm.vy, &vm.omega};
    *fp[c] += h;
    *fm[c] -= h;
    g[c] = (ieg::window_loss(m, ev, tp, vp, cfg) - ieg::window_loss(m, ev, tm, vm, cfg)) / (2.0 * h);
  }
  return g;
}

// A random window of `count` events scattered over the pattern region seen
// under pose T, with times inside the model's t range.
inline std::vector<Event> random_window(std::mt19937_64& rng, const Pose2& T, std::size_t count) {
  std::uniform_real_distribution<double> xy(-30.0, 30.0), dt(0.0, 2e-5);
  std::bernoulli_distribution coin(0.5);
  std::vector<Event> ev(count);
  double t = 0.0123;
  for (auto& e : ev) {
    const Point2 p = unwarp({xy(rng), xy(rng)}, T);
    t += dt(rng);
    e = {t, std::round(p.x), std::round(p.y), coin(rng) ? 1 : -1};
  }
  return ev;
}

}  // namespace ieg::oracle
