#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "ieg/core.hpp"
#include "ieg/model.hpp"

namespace ieg {

enum class PolarityMode : std::uint8_t {
  kIgnore,  // sum of 1 - |G|
  kMatch,   // sum of (p - G)^2
};

struct TrackerConfig {
  int window_size = 20000;  // M
  int stride = 300;         // K
  double lr = 1e-4;
  double eps_bar = 1e-6;
  int max_iters = 5000;
  PolarityMode polarity_mode = PolarityMode::kIgnore;
  bool normalize_by_m = false;

  // Gradient steps treat rotation and velocity as the pixel displacement they
  // produce: r is scaled by `rotation_radius` (px) and velocities by
  // `velocity_horizon` (s). Zero picks per window: the radius of gyration of
  // the warped events and the time span of the window. Setting both to 1 gives
  // plain unscaled gradient descent.
  double rotation_radius = 0.0;
  double velocity_horizon = 0.0;

  // Start each window from the previous estimate carried forward to the new
  // window start at the estimated velocity.
  bool propagate_warm_start = true;
  // A short final window is tracked only if it holds this fraction of M.
  double min_final_fraction = 0.1;

  void validate() const;
};

struct LossGrad {
  double loss = 0.0;
  std::array<double, 3> d_pose{};      // d/d(tx, ty, r)
  std::array<double, 3> d_velocity{};  // d/d(vx, vy, omega)
};

// Events must be time-ordered; the first event's time is the window start and
// terms are summed in the given order.
double window_loss(const IegModel& model, std::span<const Event> events, const Pose2& pose,
                   const Velocity2& velocity, const TrackerConfig& cfg);

LossGrad window_loss_grad(const IegModel& model, std::span<const Event> events, const Pose2& pose,
                          const Velocity2& velocity, const TrackerConfig& cfg);

// Gradient descent from (pose0, velocity0) until the loss decrease drops below
// eps_bar (the first iteration never stops) or max_iters. Returns the state at
// which the final loss was evaluated.
WindowState optimize_window(const IegModel& model, std::span<const Event> events,
                            const Pose2& pose0, const Velocity2& velocity0,
                            const TrackerConfig& cfg);

struct TrackedWindow {
  double t_start = 0.0;
  double t_end = 0.0;  // time of the window's last event
  WindowState state;   // pose at t_start, body velocity
  Pose2 pose_at_end;   // state.pose carried to t_end
  double wall_seconds = 0.0;
};

struct Trajectory {
  std::vector<TrackedWindow> windows;
};

using WindowCallback = std::function<void(std::size_t index, const TrackedWindow&)>;

// Number of windows slide_track will process for a stream of n events.
std::size_t window_count(std::size_t n, const TrackerConfig& cfg);

// Window j covers events [j K, j K + M); the first starts from (pose0, 0).
Trajectory slide_track(const IegModel& model, std::span<const Event> events, const Pose2& pose0,
                       const TrackerConfig& cfg, const WindowCallback& on_window = {});

// CSV t,tx,ty,r,vx,vy,omega,iters,loss with the pose at the window end time.
void write_trajectory_csv(const Trajectory& trajectory, const std::filesystem::path& path);
Trajectory read_trajectory_csv(const std::filesystem::path& path);

}  // namespace ieg
