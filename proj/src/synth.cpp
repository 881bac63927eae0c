#include "ieg/synth.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "ieg/error.hpp"

namespace ieg {

void SynthConfig::validate() const {
  if (!(delta_bar > 0.0)) throw InvalidArgument("delta_bar must be positive");
  if (!(sigma > 0.0)) throw InvalidArgument("sigma must be positive");
  if (!(w > 0.0)) throw InvalidArgument("blur radius w must be positive");
  if (!(t_min >= 0.0) || !(t_max > t_min)) throw InvalidArgument("t range must satisfy 0 <= t_min < t_max");
  if (!(v_max >= v_min)) throw InvalidArgument("velocity range is empty");
  if (!(omega_max >= omega_min)) throw InvalidArgument("angular velocity range is empty");
  if (v_min == v_max && v_min == 0.0 && omega_min == omega_max && omega_min == 0.0)
    throw InvalidArgument("velocity ranges admit only zero motion; no event can fire");
  if (!(background_ratio >= 0.0) || !(background_ratio < 1.0))
    throw InvalidArgument("background ratio must lie in [0, 1)");
  if (samples_per_event < 1) throw InvalidArgument("samples_per_event must be at least 1");
}

double theoretical_delta(Point2 grad, Point2 edge, const Velocity2& v, double t,
                         VelocityModel model) {
  const Point2 rotated = rotate(grad, v.omega * t);
  Point2 velocity;
  if (model == VelocityModel::kPaperLiteral) {
    velocity = {v.vx + std::cos(v.omega), v.vy + std::sin(v.omega)};
  } else {
    velocity = point_velocity(edge, v);
  }
  return dot(rotated, velocity) * t;
}

std::optional<int> quantize_delta(double delta, double delta_bar) {
  if (delta > delta_bar) return 1;
  if (delta < -delta_bar) return -1;
  return std::nullopt;
}

double gaussian_blur_sample(int polarity, double dx, double dy, double sigma, double w) {
  const double r2 = dx * dx + dy * dy;
  if (std::sqrt(r2) > w) return 0.0;
  return polarity * std::exp(-r2 / (2.0 * sigma * sigma));
}

namespace {

constexpr std::size_t kChunk = 4096;
constexpr std::size_t kMaxRejections = 1'000'000;

std::mt19937_64 chunk_rng(std::uint64_t seed, std::uint64_t chunk) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(chunk), static_cast<std::uint32_t>(chunk >> 32)};
  return std::mt19937_64(seq);
}

struct Motion {
  double t;
  Velocity2 v;
};

class SampleDrawer {
 public:
  SampleDrawer(const Pattern& pattern, const SynthConfig& cfg) : cfg_(cfg) {
    edges_.reserve(pattern.edges().size());
    double max_radius = 0.0;
    for (const EdgePoint& e : pattern.edges()) {
      const Point2 q = pattern.to_pattern_frame(e.x, e.y);
      edges_.push_back(q);
      max_radius = std::max(max_radius, norm(q));
    }
    const double v_abs = std::max(std::abs(cfg.v_min), std::abs(cfg.v_max));
    const double w_abs = std::max(std::abs(cfg.omega_min), std::abs(cfg.omega_max));
    const double max_disp = std::numbers::sqrt2 * v_abs * cfg.t_max + w_abs * cfg.t_max * max_radius;
    half_x_ = pattern.width() / 2.0 + cfg.w + max_disp;
    half_y_ = pattern.height() / 2.0 + cfg.w + max_disp;
  }

  Motion motion(std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> ut(cfg_.t_min, cfg_.t_max);
    std::uniform_real_distribution<double> uv(cfg_.v_min, cfg_.v_max);
    std::uniform_real_distribution<double> uw(cfg_.omega_min, cfg_.omega_max);
    Motion m;
    m.t = ut(rng);
    m.v.vx = uv(rng);
    m.v.vy = uv(rng);
    m.v.omega = uw(rng);
    return m;
  }

  Point2 disk_offset(std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const double radius = cfg_.w * std::sqrt(u01(rng));
    const double angle = 2.0 * std::numbers::pi * u01(rng);
    return {radius * std::cos(angle), radius * std::sin(angle)};
  }

  Point2 domain_point(std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> ux(-half_x_, half_x_);
    std::uniform_real_distribution<double> uy(-half_y_, half_y_);
    const double x = ux(rng);
    return {x, uy(rng)};
  }

  // True when p, seen at time t under motion v, is farther than w from
  // every (moved) edge point.
  bool off_edge(Point2 p, const Motion& m) const {
    const Point2 shift = advect({0.0, 0.0}, m.v, m.t);
    const Point2 q = rotate(p - shift, -m.v.omega * m.t);
    const double w2 = cfg_.w * cfg_.w;
    for (const Point2& e : edges_) {
      const double dx = q.x - e.x;
      const double dy = q.y - e.y;
      if (dx * dx + dy * dy <= w2) return false;
    }
    return true;
  }

  const std::vector<Point2>& edges() const { return edges_; }

 private:
  const SynthConfig& cfg_;
  std::vector<Point2> edges_;
  double half_x_ = 0.0;
  double half_y_ = 0.0;
};

}  // namespace

std::vector<TrainingSample> generate_training_set(const Pattern& pattern, const SynthConfig& cfg,
                                                  std::size_t n, std::uint64_t seed,
                                                  std::vector<SampleOrigin>* origins) {
  cfg.validate();
  if (pattern.edges().empty())
    throw InvalidArgument("pattern has zero edges above the edge threshold");
  if (n == 0) throw InvalidArgument("sample count must be positive");

  const auto n_background =
      static_cast<std::size_t>(std::ceil(cfg.background_ratio * static_cast<double>(n)));
  const std::size_t n_edge = n - n_background;

  SampleDrawer drawer(pattern, cfg);
  const auto& edges = pattern.edges();
  std::vector<TrainingSample> samples(n);
  std::vector<SampleOrigin> local_origins(origins ? n : 0);
  const auto chunks = static_cast<std::int64_t>((n + kChunk - 1) / kChunk);
  std::atomic<bool> failed = false;

#pragma omp parallel for schedule(dynamic)
  for (std::int64_t c = 0; c < chunks; ++c) {
    auto rng = chunk_rng(seed, static_cast<std::uint64_t>(c));
    std::uniform_int_distribution<std::size_t> pick(0, edges.size() - 1);
    const std::size_t begin = static_cast<std::size_t>(c) * kChunk;
    const std::size_t end = std::min(n, begin + kChunk);
    std::size_t i = begin;
    std::size_t rejections = 0;
    // On-edge part of this chunk.
    while (i < std::min(end, n_edge)) {
      const Motion m = drawer.motion(rng);
      const std::size_t e = pick(rng);
      const Point2 grad{edges[e].gx, edges[e].gy};
      const Point2 q = drawer.edges()[e];
      const auto polarity =
          quantize_delta(theoretical_delta(grad, q, m.v, m.t, cfg.velocity_model), cfg.delta_bar);
      if (!polarity) {
        if (++rejections > kMaxRejections) {
          failed = true;
          break;
        }
        continue;
      }
      rejections = 0;
      const Point2 moved = advect(q, m.v, m.t);
      for (int j = 0; j < cfg.samples_per_event && i < std::min(end, n_edge); ++j, ++i) {
        const Point2 d = drawer.disk_offset(rng);
        samples[i].input = {moved.x + d.x, moved.y + d.y, m.t, m.v.vx, m.v.vy, m.v.omega};
        samples[i].target = gaussian_blur_sample(*polarity, d.x, d.y, cfg.sigma, cfg.w);
        if (origins) local_origins[i] = {static_cast<int>(e), d.x, d.y};
      }
    }
    // Background part.
    while (i < end && !failed) {
      const Motion m = drawer.motion(rng);
      const Point2 p = drawer.domain_point(rng);
      if (!drawer.off_edge(p, m)) {
        if (++rejections > kMaxRejections) {
          failed = true;
          break;
        }
        continue;
      }
      rejections = 0;
      samples[i].input = {p.x, p.y, m.t, m.v.vx, m.v.vy, m.v.omega};
      samples[i].target = 0.0;
      if (origins) local_origins[i] = {-1, 0.0, 0.0};
      ++i;
    }
  }
  if (failed) {
    throw InvalidArgument(
        "sample generation stalled: motion ranges never fire events or background domain is "
        "fully covered by edges");
  }
  if (origins) *origins = std::move(local_origins);
  return samples;
}

double SimulationSpec::duration() const {
  double total = 0.0;
  for (const auto& s : segments) total += s.duration;
  return total;
}

void SimulationSpec::validate() const {
  if (sensor_width <= 0 || sensor_height <= 0) throw InvalidArgument("sensor size must be positive");
  if (!(dt > 0.0)) throw InvalidArgument("simulation step dt must be positive");
  if (!(contrast > 0.0)) throw InvalidArgument("contrast threshold C must be positive");
  if (segments.empty()) throw InvalidArgument("trajectory needs at least one motion segment");
  for (const auto& s : segments) {
    if (!(s.duration > 0.0)) throw InvalidArgument("motion segment durations must be positive");
    if (!std::isfinite(s.velocity.vx) || !std::isfinite(s.velocity.vy) ||
        !std::isfinite(s.velocity.omega))
      throw InvalidArgument("motion segment velocity must be finite");
  }
}

EventStream simulate_stream(const Pattern& pattern, const SimulationSpec& spec,
                            std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  struct Source {
    Point2 q;
    Point2 grad;
    double accumulator;
  };
  std::vector<Source> sources;
  sources.reserve(pattern.edges().size());
  for (const EdgePoint& e : pattern.edges()) {
    sources.push_back({pattern.to_pattern_frame(e.x, e.y), {e.gx, e.gy}, 0.0});
  }
  // Random initial phase so that pixels do not fire in lockstep.
  for (auto& s : sources) s.accumulator = u01(rng) * spec.contrast;

  EventStream stream;
  stream.width = spec.sensor_width;
  stream.height = spec.sensor_height;
  stream.duration = spec.duration();

  Pose2 segment_pose = spec.initial_pose;
  double segment_start = 0.0;
  for (const MotionSegment& segment : spec.segments) {
    const Velocity2& v = segment.velocity;
    const double segment_end = segment_start + segment.duration;
    std::vector<double> rates(sources.size());
    for (std::size_t i = 0; i < sources.size(); ++i) {
      rates[i] = dot(sources[i].grad, point_velocity(sources[i].q, v));
    }
    for (std::int64_t step = 0;; ++step) {
      const double local = static_cast<double>(step) * spec.dt;
      const double t0 = segment_start + local;
      if (t0 >= segment_end - 1e-9 * spec.dt) break;
      const double h = std::min(spec.dt, segment_end - t0);
      stream.ground_truth.push_back({t0, integrate(segment_pose, v, local), v});
      for (std::size_t i = 0; i < sources.size(); ++i) {
        Source& s = sources[i];
        s.accumulator += std::abs(rates[i] * h);
        while (s.accumulator >= spec.contrast) {
          s.accumulator -= spec.contrast;
          const double jitter = u01(rng) * h;
          const Pose2 pose = integrate(segment_pose, v, local + jitter);
          const Point2 x = unwarp(s.q, pose);
          const double px = std::round(x.x);
          const double py = std::round(x.y);
          if (px < 0.0 || py < 0.0 || px >= spec.sensor_width || py >= spec.sensor_height) continue;
          stream.events.push_back({t0 + jitter, px, py, rates[i] > 0.0 ? 1 : -1});
        }
      }
    }
    segment_pose = integrate(segment_pose, v, segment.duration);
    segment_start = segment_end;
  }
  stream.ground_truth.push_back({stream.duration, segment_pose, spec.segments.back().velocity});
  std::stable_sort(stream.events.begin(), stream.events.end(),
                   [](const Event& a, const Event& b) { return a.t < b.t; });
  return stream;
}

}  // namespace ieg
