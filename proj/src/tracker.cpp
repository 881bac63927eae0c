#include "ieg/tracker.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "ieg/error.hpp"
#include "ieg/kernels.hpp"
#include "ieg/stream_io.hpp"

namespace ieg {

void TrackerConfig::validate() const {
  if (window_size < 1) throw InvalidArgument("window size M must be positive");
  if (stride < 1) throw InvalidArgument("stride K must be positive");
  if (stride > window_size) throw InvalidArgument("stride K must not exceed the window size M");
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw InvalidArgument("lr must be finite and >= 0");
  if (!(eps_bar > 0.0)) throw InvalidArgument("eps_bar must be positive");
  if (max_iters < 2) throw InvalidArgument("max_iters must be at least 2");
  if (!(rotation_radius >= 0.0) || !std::isfinite(rotation_radius)) {
    throw InvalidArgument("rotation_radius must be finite and >= 0");
  }
  if (!(velocity_horizon >= 0.0) || !std::isfinite(velocity_horizon)) {
    throw InvalidArgument("velocity_horizon must be finite and >= 0");
  }
  if (!(min_final_fraction >= 0.0 && min_final_fraction <= 1.0)) {
    throw InvalidArgument("min_final_fraction must lie in [0, 1]");
  }
}

namespace {

struct WindowInputs {
  std::vector<Input6> inputs;
  std::vector<double> out;
  std::vector<Input6> grad;
};

void build_inputs(const IegModel& model, std::span<const Event> events, const Pose2& pose,
                  const Velocity2& velocity, std::vector<Input6>& inputs) {
  if (events.empty()) throw InvalidArgument("empty event window");
  const double t0 = events.front().t;
  const double lo = model.normalization().lower(2);
  const double hi = model.normalization().upper(2);
  inputs.resize(events.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    const Point2 q = warp({events[i].x, events[i].y}, pose);
    const double t = std::clamp(events[i].t - t0, lo, hi);
    inputs[i] = {q.x, q.y, t, velocity.vx, velocity.vy, velocity.omega};
  }
}

// Per-event terms are summed in time order. Events sharing a timestamp may
// arrive in any order, so ties are broken by (x, y, polarity); the returned
// permutation is empty when all times are distinct.
std::vector<std::size_t> summation_order(std::span<const Event> events) {
  bool ties = false;
  for (std::size_t i = 1; i < events.size() && !ties; ++i) ties = events[i].t == events[i - 1].t;
  if (!ties) return {};
  std::vector<std::size_t> order(events.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Event& u = events[a];
    const Event& v = events[b];
    if (u.t != v.t) return u.t < v.t;
    if (u.x != v.x) return u.x < v.x;
    if (u.y != v.y) return u.y < v.y;
    return u.polarity < v.polarity;
  });
  return order;
}

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

double event_loss(double g, int polarity, PolarityMode mode) {
  if (mode == PolarityMode::kIgnore) return 1.0 - std::abs(g);
  const double d = polarity - g;
  return d * d;
}

double event_loss_slope(double g, int polarity, PolarityMode mode) {
  if (mode == PolarityMode::kIgnore) return -sign(g);
  return -2.0 * (polarity - g);
}

LossGrad loss_grad(const IegModel& model, std::span<const Event> events, const Pose2& pose,
                   const Velocity2& velocity, const TrackerConfig& cfg, WindowInputs& buf) {
  build_inputs(model, events, pose, velocity, buf.inputs);
  buf.out.resize(events.size());
  buf.grad.resize(events.size());
  kernels::forward_input_grad_batch(model, buf.inputs, buf.out, buf.grad);
  LossGrad lg;
  const auto order = summation_order(events);
  for (std::size_t n = 0; n < events.size(); ++n) {
    const std::size_t i = order.empty() ? n : order[n];
    const double g = buf.out[i];
    const double s = event_loss_slope(g, events[i].polarity, cfg.polarity_mode);
    lg.loss += event_loss(g, events[i].polarity, cfg.polarity_mode);
    const Input6& d = buf.grad[i];
    const Jacobian23 j = warp_jacobian({events[i].x, events[i].y}, pose);
    for (int k = 0; k < 3; ++k) {
      lg.d_pose[k] += s * (d[0] * j[k] + d[1] * j[3 + k]);
      lg.d_velocity[k] += s * d[3 + k];
    }
  }
  if (cfg.normalize_by_m) {
    const double m = static_cast<double>(events.size());
    lg.loss /= m;
    for (int k = 0; k < 3; ++k) {
      lg.d_pose[k] /= m;
      lg.d_velocity[k] /= m;
    }
  }
  return lg;
}

std::string describe(const Pose2& p, const Velocity2& v) {
  std::ostringstream s;
  s << "pose (" << p.tx << ", " << p.ty << ", " << p.r << "), velocity (" << v.vx << ", " << v.vy
    << ", " << v.omega << ")";
  return s.str();
}

}  // namespace

double window_loss(const IegModel& model, std::span<const Event> events, const Pose2& pose,
                   const Velocity2& velocity, const TrackerConfig& cfg) {
  std::vector<Input6> inputs;
  build_inputs(model, events, pose, velocity, inputs);
  std::vector<double> out(events.size());
  kernels::forward_batch(model, inputs, out);
  double loss = 0.0;
  const auto order = summation_order(events);
  for (std::size_t n = 0; n < events.size(); ++n) {
    const std::size_t i = order.empty() ? n : order[n];
    loss += event_loss(out[i], events[i].polarity, cfg.polarity_mode);
  }
  if (cfg.normalize_by_m) loss /= static_cast<double>(events.size());
  return loss;
}

LossGrad window_loss_grad(const IegModel& model, std::span<const Event> events, const Pose2& pose,
                          const Velocity2& velocity, const TrackerConfig& cfg) {
  WindowInputs buf;
  return loss_grad(model, events, pose, velocity, cfg, buf);
}

WindowState optimize_window(const IegModel& model, std::span<const Event> events,
                            const Pose2& pose0, const Velocity2& velocity0,
                            const TrackerConfig& cfg) {
  cfg.validate();
  if (events.empty()) throw InvalidArgument("empty event window");

  double radius2 = cfg.rotation_radius * cfg.rotation_radius;
  double horizon2 = cfg.velocity_horizon * cfg.velocity_horizon;
  if (cfg.rotation_radius == 0.0) {
    double q2 = 0.0;
    const auto order = summation_order(events);
    for (std::size_t n = 0; n < events.size(); ++n) {
      const Event& e = events[order.empty() ? n : order[n]];
      const Point2 q = warp({e.x, e.y}, pose0);
      q2 += dot(q, q);
    }
    radius2 = std::max(q2 / (2.0 * static_cast<double>(events.size())), 1.0);
  }
  if (cfg.velocity_horizon == 0.0) {
    const double span = std::clamp(events.back().t - events.front().t, 0.0,
                                   model.normalization().upper(2));
    horizon2 = std::max(span * span, 1e-12);
  }

  const Normalization& norm = model.normalization();
  WindowInputs buf;
  Pose2 pose = pose0;
  Velocity2 velocity = velocity0;
  double previous = std::numeric_limits<double>::infinity();
  for (int k = 1;; ++k) {
    const LossGrad lg = loss_grad(model, events, pose, velocity, cfg, buf);
    const bool finite = std::isfinite(lg.loss) &&
                        std::all_of(lg.d_pose.begin(), lg.d_pose.end(),
                                    [](double g) { return std::isfinite(g); }) &&
                        std::all_of(lg.d_velocity.begin(), lg.d_velocity.end(),
                                    [](double g) { return std::isfinite(g); });
    if (!finite) {
      throw NumericalError("non-finite loss or gradient at iteration " + std::to_string(k) +
                           ", " + describe(pose, velocity));
    }
    if (previous - lg.loss < cfg.eps_bar || k == cfg.max_iters) {
      return {pose, velocity, k, lg.loss};
    }
    previous = lg.loss;
    pose.tx -= cfg.lr * lg.d_pose[0];
    pose.ty -= cfg.lr * lg.d_pose[1];
    pose.r -= cfg.lr * lg.d_pose[2] / radius2;
    velocity.vx -= cfg.lr * lg.d_velocity[0] / horizon2;
    velocity.vy -= cfg.lr * lg.d_velocity[1] / horizon2;
    velocity.omega -= cfg.lr * lg.d_velocity[2] / (horizon2 * radius2);
    // The generator is only meaningful over the velocities it was trained on.
    velocity.vx = std::clamp(velocity.vx, norm.lower(3), norm.upper(3));
    velocity.vy = std::clamp(velocity.vy, norm.lower(4), norm.upper(4));
    velocity.omega = std::clamp(velocity.omega, norm.lower(5), norm.upper(5));
    if (!std::isfinite(pose.tx) || !std::isfinite(pose.ty) || !std::isfinite(pose.r) ||
        !std::isfinite(velocity.vx) || !std::isfinite(velocity.vy) ||
        !std::isfinite(velocity.omega)) {
      throw NumericalError("state diverged at iteration " + std::to_string(k));
    }
  }
}

std::size_t window_count(std::size_t n, const TrackerConfig& cfg) {
  const auto m = static_cast<std::size_t>(cfg.window_size);
  const auto k = static_cast<std::size_t>(cfg.stride);
  if (n < m) return 0;
  std::size_t full = (n - m) / k + 1;
  const std::size_t covered = (full - 1) * k + m;
  if (covered < n) {
    const std::size_t tail = n - full * k;
    if (static_cast<double>(tail) >= cfg.min_final_fraction * static_cast<double>(m)) ++full;
  }
  return full;
}

Trajectory slide_track(const IegModel& model, std::span<const Event> events, const Pose2& pose0,
                       const TrackerConfig& cfg, const WindowCallback& on_window) {
  cfg.validate();
  const auto m = static_cast<std::size_t>(cfg.window_size);
  const auto k = static_cast<std::size_t>(cfg.stride);
  if (events.size() < m) {
    throw InvalidArgument("stream has " + std::to_string(events.size()) +
                          " events, fewer than the window size " + std::to_string(m));
  }
  const std::size_t count = window_count(events.size(), cfg);
  Trajectory trajectory;
  trajectory.windows.reserve(count);
  Pose2 pose = pose0;
  Velocity2 velocity;
  for (std::size_t j = 0; j < count; ++j) {
    const std::size_t begin = j * k;
    const std::size_t end = std::min(events.size(), begin + m);
    const auto window = events.subspan(begin, end - begin);
    if (j > 0 && cfg.propagate_warm_start) {
      const TrackedWindow& prev = trajectory.windows.back();
      pose = integrate(prev.state.pose, prev.state.velocity, window.front().t - prev.t_start);
    }
    const auto start = std::chrono::steady_clock::now();
    TrackedWindow tw;
    tw.t_start = window.front().t;
    tw.t_end = window.back().t;
    try {
      tw.state = optimize_window(model, window, pose, velocity, cfg);
    } catch (const NumericalError& e) {
      throw NumericalError("window " + std::to_string(j) + ": " + e.what());
    }
    tw.pose_at_end = integrate(tw.state.pose, tw.state.velocity, tw.t_end - tw.t_start);
    tw.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    pose = tw.state.pose;
    velocity = tw.state.velocity;
    trajectory.windows.push_back(tw);
    if (on_window) on_window(j, trajectory.windows.back());
  }
  return trajectory;
}

void write_trajectory_csv(const Trajectory& trajectory, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "t,tx,ty,r,vx,vy,omega,iters,loss\n";
  for (const TrackedWindow& w : trajectory.windows) {
    const Pose2& p = w.pose_at_end;
    const Velocity2& v = w.state.velocity;
    out << format_double(w.t_end) << ',' << format_double(p.tx) << ',' << format_double(p.ty)
        << ',' << format_double(p.r) << ',' << format_double(v.vx) << ',' << format_double(v.vy)
        << ',' << format_double(v.omega) << ',' << w.state.iterations << ','
        << format_double(w.state.final_loss) << '\n';
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Trajectory read_trajectory_csv(const std::filesystem::path& path) {
  CsvReader reader(path, "t,tx,ty,r,vx,vy,omega,iters,loss");
  Trajectory trajectory;
  std::vector<double> row;
  while (reader.next(row)) {
    TrackedWindow w;
    w.t_start = w.t_end = row[0];
    w.pose_at_end = {row[1], row[2], row[3]};
    w.state.pose = w.pose_at_end;
    w.state.velocity = {row[4], row[5], row[6]};
    if (row[7] < 0 || row[7] != std::floor(row[7])) reader.fail("iters must be a count");
    w.state.iterations = static_cast<int>(row[7]);
    w.state.final_loss = row[8];
    if (!trajectory.windows.empty() && w.t_end < trajectory.windows.back().t_end) {
      reader.fail("rows are not in time order");
    }
    trajectory.windows.push_back(w);
  }
  return trajectory;
}

}  // namespace ieg
