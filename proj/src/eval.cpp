#include "ieg/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "ieg/error.hpp"
#include "ieg/stream_io.hpp"

namespace ieg {

TruthSample interpolate_truth(std::span<const TruthSample> truth, double t) {
  if (truth.empty()) throw InvalidArgument("empty ground truth");
  if (t < truth.front().t || t > truth.back().t) {
    throw InvalidArgument("time " + format_double(t) + " outside ground truth span [" +
                          format_double(truth.front().t) + ", " + format_double(truth.back().t) +
                          "]");
  }
  auto hi = std::lower_bound(truth.begin(), truth.end(), t,
                             [](const TruthSample& s, double v) { return s.t < v; });
  if (hi->t == t) return *hi;
  const TruthSample& b = *hi;
  const TruthSample& a = *(hi - 1);
  const double alpha = (t - a.t) / (b.t - a.t);
  auto lerp = [alpha](double x, double y) { return x + alpha * (y - x); };
  TruthSample s;
  s.t = t;
  s.pose = {lerp(a.pose.tx, b.pose.tx), lerp(a.pose.ty, b.pose.ty),
            a.pose.r + alpha * wrap_angle(b.pose.r - a.pose.r)};
  s.velocity = {lerp(a.velocity.vx, b.velocity.vx), lerp(a.velocity.vy, b.velocity.vy),
                lerp(a.velocity.omega, b.velocity.omega)};
  return s;
}

std::vector<Components> window_errors(const Trajectory& trajectory,
                                      std::span<const TruthSample> truth) {
  std::vector<Components> errors;
  errors.reserve(trajectory.windows.size());
  for (const TrackedWindow& w : trajectory.windows) {
    const TruthSample gt = interpolate_truth(truth, w.t_end);
    const Pose2& p = w.pose_at_end;
    const Velocity2& v = w.state.velocity;
    errors.push_back({p.tx - gt.pose.tx, p.ty - gt.pose.ty, wrap_angle(p.r - gt.pose.r),
                      v.vx - gt.velocity.vx, v.vy - gt.velocity.vy,
                      v.omega - gt.velocity.omega});
  }
  return errors;
}

ErrorReport align_and_score(const Trajectory& trajectory, std::span<const TruthSample> truth,
                            int cadence, std::optional<RunEcho> config) {
  if (trajectory.windows.empty()) throw InvalidArgument("empty trajectory");
  if (cadence < 1) throw InvalidArgument("cadence must be positive");
  const std::vector<Components> errors = window_errors(trajectory, truth);
  ErrorReport report;
  report.window_count = trajectory.windows.size();
  report.cadence = cadence;
  report.config = config;

  std::size_t later = 0;
  for (std::size_t j = 0; j < errors.size(); j += static_cast<std::size_t>(cadence)) {
    ++report.scored_windows;
    for (int c = 0; c < 6; ++c) {
      const double e2 = errors[j][c] * errors[j][c];
      report.mse[c] += e2;
      if (j > 0) report.mse_after_first[c] += e2;
    }
    if (j > 0) ++later;
  }
  for (int c = 0; c < 6; ++c) {
    report.mse[c] /= static_cast<double>(report.scored_windows);
    report.mse_after_first[c] = later > 0 ? report.mse_after_first[c] / later : 0.0;
  }

  report.first_window_iterations = trajectory.windows.front().state.iterations;
  std::vector<double> rest;
  for (std::size_t j = 1; j < trajectory.windows.size(); ++j) {
    rest.push_back(trajectory.windows[j].state.iterations);
  }
  if (!rest.empty()) {
    double sum = 0.0;
    for (double r : rest) sum += r;
    report.mean_subsequent_iterations = sum / static_cast<double>(rest.size());
    std::sort(rest.begin(), rest.end());
    const std::size_t mid = rest.size() / 2;
    report.median_subsequent_iterations =
        rest.size() % 2 == 1 ? rest[mid] : 0.5 * (rest[mid - 1] + rest[mid]);
  }
  return report;
}

namespace {

nlohmann::ordered_json components_json(const Components& c) {
  nlohmann::ordered_json j;
  for (int i = 0; i < 6; ++i) j[kComponentNames[i]] = c[i];
  return j;
}

}  // namespace

std::string report_json(const ErrorReport& report) {
  nlohmann::ordered_json j;
  j["mse"] = components_json(report.mse);
  j["mse_after_first"] = components_json(report.mse_after_first);
  j["window_count"] = report.window_count;
  j["scored_windows"] = report.scored_windows;
  j["cadence"] = report.cadence;
  j["first_window_iterations"] = report.first_window_iterations;
  j["mean_subsequent_iterations"] = report.mean_subsequent_iterations;
  j["median_subsequent_iterations"] = report.median_subsequent_iterations;
  if (report.config) {
    j["config"] = {{"window_size", report.config->window_size},
                   {"stride", report.config->stride},
                   {"blur_width", report.config->blur_width},
                   {"lr", report.config->lr}};
  }
  return j.dump(2) + "\n";
}

std::string report_table(const ErrorReport& report) {
  // Six significant digits keep the columns aligned; the JSON has full precision.
  auto cell = [](double v) {
    std::ostringstream s;
    s << std::setprecision(6) << v;
    return s.str();
  };
  std::ostringstream out;
  out << "MSE per component (x, y: px^2; r: rad^2, unscaled; vx, vy: (px/s)^2; omega: (rad/s)^2)\n";
  const char* headers[6] = {"x", "y", "r", "vx", "vy", "omega"};
  out << std::left << std::setw(18) << "windows";
  for (const char* h : headers) out << std::right << std::setw(14) << h;
  out << '\n';
  auto row = [&](const char* label, const Components& c) {
    out << std::left << std::setw(18) << label;
    for (double v : c) out << std::right << std::setw(14) << cell(v);
    out << '\n';
  };
  row("all", report.mse);
  row("after first", report.mse_after_first);
  out << "windows " << report.window_count << ", scored " << report.scored_windows
      << " (every " << report.cadence << ")\n";
  out << "iterations: first window " << report.first_window_iterations << ", later mean "
      << format_double(report.mean_subsequent_iterations) << ", later median "
      << format_double(report.median_subsequent_iterations) << '\n';
  if (report.config) {
    out << "config: M " << report.config->window_size << ", K " << report.config->stride
        << ", w " << format_double(report.config->blur_width) << ", lr "
        << format_double(report.config->lr) << '\n';
  }
  return out.str();
}

void write_report_json(const ErrorReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << report_json(report);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

namespace {

void write_svg(const std::filesystem::path& path, const std::string& title,
               const std::vector<double>& t, const std::vector<double>& est,
               const std::vector<double>& gt) {
  constexpr double kW = 640.0;
  constexpr double kH = 320.0;
  constexpr double kPad = 40.0;
  const double t0 = t.front();
  const double t1 = t.back() > t0 ? t.back() : t0 + 1.0;
  double lo = std::min(*std::min_element(est.begin(), est.end()),
                       *std::min_element(gt.begin(), gt.end()));
  double hi = std::max(*std::max_element(est.begin(), est.end()),
                       *std::max_element(gt.begin(), gt.end()));
  if (hi - lo < 1e-12) {
    lo -= 1.0;
    hi += 1.0;
  }
  auto polyline = [&](const std::vector<double>& v) {
    std::ostringstream s;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double x = kPad + (t[i] - t0) / (t1 - t0) * (kW - 2 * kPad);
      const double y = kH - kPad - (v[i] - lo) / (hi - lo) * (kH - 2 * kPad);
      s << (i ? " " : "") << format_double(x) << ',' << format_double(y);
    }
    return s.str();
  };
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" viewBox=\"0 0 " << kW << ' ' << kH << "\">\n"
      << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "  <text x=\"" << kPad << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">"
      << title << "</text>\n"
      << "  <text x=\"4\" y=\"" << kPad << "\" font-family=\"sans-serif\" font-size=\"10\">"
      << format_double(hi) << "</text>\n"
      << "  <text x=\"4\" y=\"" << kH - kPad << "\" font-family=\"sans-serif\" font-size=\"10\">"
      << format_double(lo) << "</text>\n"
      << "  <polyline fill=\"none\" stroke=\"gray\" stroke-dasharray=\"6,4\" points=\""
      << polyline(gt) << "\"/>\n"
      << "  <polyline fill=\"none\" stroke=\"black\" points=\"" << polyline(est) << "\"/>\n"
      << "</svg>\n";
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace

void emit_timeseries(const Trajectory& trajectory, std::span<const TruthSample> truth,
                     const std::filesystem::path& path) {
  if (trajectory.windows.empty()) throw InvalidArgument("empty trajectory");
  std::vector<double> t;
  std::array<std::vector<double>, 3> est;
  std::array<std::vector<double>, 3> gt;
  for (const TrackedWindow& w : trajectory.windows) {
    const TruthSample g = interpolate_truth(truth, w.t_end);
    t.push_back(w.t_end);
    est[0].push_back(w.pose_at_end.tx);
    est[1].push_back(w.pose_at_end.ty);
    est[2].push_back(w.pose_at_end.r);
    gt[0].push_back(g.pose.tx);
    gt[1].push_back(g.pose.ty);
    // Keep truth on the estimate's branch so the curves overlay.
    gt[2].push_back(w.pose_at_end.r - wrap_angle(w.pose_at_end.r - g.pose.r));
  }
  {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << "t,est_x,gt_x,est_y,gt_y,est_r,gt_r\n";
    for (std::size_t i = 0; i < t.size(); ++i) {
      out << format_double(t[i]);
      for (int c = 0; c < 3; ++c) out << ',' << format_double(est[c][i]) << ',' << format_double(gt[c][i]);
      out << '\n';
    }
    if (!out) throw IoError("failed writing '" + path.string() + "'");
  }
  const char* suffix[3] = {"x", "y", "r"};
  const char* title[3] = {"x (px)", "y (px)", "r (rad)"};
  for (int c = 0; c < 3; ++c) {
    auto svg = path;
    svg.replace_filename(path.stem().string() + "_" + suffix[c] + ".svg");
    write_svg(svg, std::string(title[c]) + ": estimate solid, ground truth dashed", t, est[c],
              gt[c]);
  }
}

}  // namespace ieg
