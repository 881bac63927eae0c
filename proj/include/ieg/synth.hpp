#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ieg/core.hpp"
#include "ieg/pattern.hpp"

namespace ieg {

// How the per-point velocity enters the theoretical intensity change.
//   kRigid:        rigid-body field (vx - w*y, vy + w*x) about the pattern center.
//   kPaperLiteral: the printed form (vx + cos w, vy + sin w).
enum class VelocityModel : std::uint8_t { kRigid, kPaperLiteral };

struct SynthConfig {
  double delta_bar = 0.001;
  double sigma = 6.0;
  double w = 6.0;
  double t_min = 0.0;
  double t_max = 0.01;
  double v_min = -500.0;
  double v_max = 500.0;
  double omega_min = -5.0;
  double omega_max = 5.0;
  double background_ratio = 0.3;
  VelocityModel velocity_model = VelocityModel::kRigid;
  // Jittered samples emitted around each fired edge point.
  int samples_per_event = 4;

  void validate() const;
};

using Input6 = std::array<double, 6>;  // (x, y, t, vx, vy, omega)

struct TrainingSample {
  Input6 input{};
  double target = 0.0;

  friend bool operator==(const TrainingSample&, const TrainingSample&) = default;
};

// Provenance of one generated sample, for consistency checks.
struct SampleOrigin {
  int edge_index = -1;  // -1 for background samples
  double dx = 0.0;
  double dy = 0.0;
};

// grad dotted with the moving-point velocity, times t. `edge` is in the
// pattern frame (relative to the pattern center).
double theoretical_delta(Point2 grad, Point2 edge, const Velocity2& v, double t,
                         VelocityModel model);

// +1 / -1 when |delta| exceeds delta_bar, nothing inside the inclusive dead band.
std::optional<int> quantize_delta(double delta, double delta_bar);

// polarity * exp(-(dx^2 + dy^2) / (2 sigma^2)) inside radius w, else 0.
double gaussian_blur_sample(int polarity, double dx, double dy, double sigma, double w);

// Deterministic for a fixed seed regardless of the worker count. The first
// n - ceil(rho * n) samples are on-edge, the rest are zero-target background.
std::vector<TrainingSample> generate_training_set(const Pattern& pattern, const SynthConfig& cfg,
                                                  std::size_t n, std::uint64_t seed,
                                                  std::vector<SampleOrigin>* origins = nullptr);

struct MotionSegment {
  double duration = 0.0;
  Velocity2 velocity;
};

struct SimulationSpec {
  int sensor_width = 240;
  int sensor_height = 180;
  Pose2 initial_pose{120.0, 90.0, 0.0};
  std::vector<MotionSegment> segments;
  double contrast = 0.01;  // C
  double dt = 1e-5;

  double duration() const;
  void validate() const;
};

struct TruthSample {
  double t = 0.0;
  Pose2 pose;
  Velocity2 velocity;
};

struct EventStream {
  int width = 0;
  int height = 0;
  double duration = 0.0;
  std::vector<Event> events;
  std::vector<TruthSample> ground_truth;
};

// Linearized event simulation of the pattern moving rigidly in front of the
// sensor. Events sit at the rounded sensor pixel of the firing edge point.
EventStream simulate_stream(const Pattern& pattern, const SimulationSpec& spec,
                            std::uint64_t seed);

}  // namespace ieg
