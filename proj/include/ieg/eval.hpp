#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ieg/synth.hpp"
#include "ieg/tracker.hpp"

namespace ieg {

// Component order everywhere: tx, ty, r, vx, vy, omega.
using Components = std::array<double, 6>;
inline constexpr std::array<const char*, 6> kComponentNames{"tx", "ty", "r", "vx", "vy", "omega"};

// Ground truth at time t: linear in translation and velocity, shortest arc in
// rotation. Throws InvalidArgument outside the sampled span.
TruthSample interpolate_truth(std::span<const TruthSample> truth, double t);

// Signed estimate minus truth per window, rotation wrapped to (-pi, pi].
std::vector<Components> window_errors(const Trajectory& trajectory,
                                      std::span<const TruthSample> truth);

struct RunEcho {
  int window_size = 0;
  int stride = 0;
  double blur_width = 0.0;
  double lr = 0.0;
  friend bool operator==(const RunEcho&, const RunEcho&) = default;
};

struct ErrorReport {
  Components mse{};             // all scored windows
  Components mse_after_first{}; // scored windows except the first window
  std::size_t window_count = 0;
  std::size_t scored_windows = 0;
  int cadence = 1;
  int first_window_iterations = 0;
  double mean_subsequent_iterations = 0.0;
  double median_subsequent_iterations = 0.0;
  std::optional<RunEcho> config;

  friend bool operator==(const ErrorReport&, const ErrorReport&) = default;
};

// Scores every `cadence`-th window starting with the first.
ErrorReport align_and_score(const Trajectory& trajectory, std::span<const TruthSample> truth,
                            int cadence = 1, std::optional<RunEcho> config = std::nullopt);

std::string report_json(const ErrorReport& report);
std::string report_table(const ErrorReport& report);
void write_report_json(const ErrorReport& report, const std::filesystem::path& path);

// CSV t,est_x,gt_x,est_y,gt_y,est_r,gt_r at `path`, plus <stem>_x.svg,
// <stem>_y.svg and <stem>_r.svg beside it.
void emit_timeseries(const Trajectory& trajectory, std::span<const TruthSample> truth,
                     const std::filesystem::path& path);

}  // namespace ieg
