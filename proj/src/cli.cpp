#include "ieg/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>

#include "ieg/error.hpp"
#include "ieg/eval.hpp"
#include "ieg/model.hpp"
#include "ieg/parallel.hpp"
#include "ieg/pattern.hpp"
#include "ieg/stream_io.hpp"
#include "ieg/synth.hpp"
#include "ieg/tracker.hpp"
#include "ieg/train.hpp"

namespace ieg::cli {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::uint64_t default_seed() {
  const char* env = std::getenv("IEG_SEED");
  if (env == nullptr || *env == '\0') return 1;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(env, &used);
    if (used != std::string(env).size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw InvalidArgument(std::string("IEG_SEED is not an unsigned integer: '") + env + "'");
  }
}

// Binds options to variables and fills any option not given on the command
// line from the JSON config: top-level keys first, then the section named
// after the subcommand. Keys are the long flag names without dashes.
class Options {
 public:
  explicit Options(CLI::App* app) : app_(app) {}

  template <class T>
  CLI::Option* add(const std::string& name, T& var, const std::string& help) {
    CLI::Option* opt = app_->add_option("--" + name, var, help)->capture_default_str();
    bind(opt, name, [&var](const json& v) { var = v.get<T>(); });
    return opt;
  }

  CLI::Option* flag(const std::string& name, bool& var, const std::string& help) {
    CLI::Option* opt = app_->add_flag("--" + name, var, help);
    bind(opt, name, [&var](const json& v) { var = v.get<bool>(); });
    return opt;
  }

  void apply(const json& config) const {
    for (const auto& a : appliers_) a(config);
    const auto section = config.find(app_->get_name());
    if (section != config.end() && section->is_object()) {
      for (const auto& a : appliers_) a(*section);
    }
  }

 private:
  void bind(CLI::Option* opt, const std::string& name, std::function<void(const json&)> set) {
    appliers_.push_back([opt, name, set](const json& obj) {
      if (opt->count() > 0 || !obj.is_object()) return;
      auto it = obj.find(name);
      if (it == obj.end()) {
        std::string underscored = name;
        std::replace(underscored.begin(), underscored.end(), '-', '_');
        it = obj.find(underscored);
      }
      if (it == obj.end()) return;
      try {
        set(*it);
      } catch (const json::exception& e) {
        throw InvalidArgument("config key '" + name + "': " + e.what());
      }
    });
  }

  CLI::App* app_;
  std::vector<std::function<void(const json&)>> appliers_;
};

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  try {
    json j = json::parse(in);
    if (!j.is_object()) throw IoError("config '" + path + "' is not a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw IoError("config '" + path + "': " + e.what());
  }
}

Pattern pattern_from_arg(const std::string& arg, double edge_threshold) {
  if (arg == "builtin") {
    const Pattern p = make_marker_pattern();
    return Pattern(p.width(), p.height(), p.intensity(), edge_threshold);
  }
  return load_pattern(arg, edge_threshold);
}

VelocityModel velocity_model_from(const std::string& s) {
  if (s == "rigid") return VelocityModel::kRigid;
  if (s == "paper-literal") return VelocityModel::kPaperLiteral;
  throw InvalidArgument("velocity model must be 'rigid' or 'paper-literal', got '" + s + "'");
}

PolarityMode polarity_from(const std::string& s) {
  if (s == "ignore") return PolarityMode::kIgnore;
  if (s == "match") return PolarityMode::kMatch;
  throw InvalidArgument("polarity mode must be 'ignore' or 'match', got '" + s + "'");
}

std::string fixed(double v) { return format_double(v, true); }

// gen-data ---------------------------------------------------------------

struct GenDataArgs {
  std::string pattern = "builtin";
  std::string out;
  std::size_t n = 200000;
  std::uint64_t seed = 1;
  SynthConfig synth;
  std::string velocity_model = "rigid";
  double edge_threshold = Pattern::kDefaultEdgeThreshold;

  void add_options(Options& o) {
    o.add("n", n, "number of samples");
    o.add("seed", seed, "random seed (default: IEG_SEED or 1)");
    o.add("delta-bar", synth.delta_bar, "firing threshold of the synthetic intensity change");
    o.add("sigma", synth.sigma, "Gaussian blur standard deviation (px)");
    o.add("w", synth.w, "blur radius (px)");
    o.add("t-min", synth.t_min, "lower end of the time range (s)");
    o.add("t-max", synth.t_max, "upper end of the time range (s)");
    o.add("v-min", synth.v_min, "lower end of the vx, vy range (px/s)");
    o.add("v-max", synth.v_max, "upper end of the vx, vy range (px/s)");
    o.add("omega-min", synth.omega_min, "lower end of the angular velocity range (rad/s)");
    o.add("omega-max", synth.omega_max, "upper end of the angular velocity range (rad/s)");
    o.add("background-ratio", synth.background_ratio, "fraction of zero-target off-edge samples");
    o.add("samples-per-event", synth.samples_per_event, "jittered samples per fired edge point");
    o.add("velocity-model", velocity_model, "rigid or paper-literal");
    o.add("edge-threshold", edge_threshold, "gradient magnitude that marks an edge pixel");
  }
};

void run_gen_data(GenDataArgs a, std::ostream& out) {
  a.synth.velocity_model = velocity_model_from(a.velocity_model);
  a.synth.validate();
  if (a.n == 0) throw InvalidArgument("--n must be positive");
  const Pattern pattern = pattern_from_arg(a.pattern, a.edge_threshold);
  const auto samples = generate_training_set(pattern, a.synth, a.n, a.seed);
  write_training_set(samples, a.out);
  std::size_t pos = 0;
  std::size_t neg = 0;
  for (const auto& s : samples) {
    if (s.target > 0.0) ++pos;
    if (s.target < 0.0) ++neg;
  }
  out << "gen-data: " << samples.size() << " samples (" << pos << " positive, " << neg
      << " negative, " << samples.size() - pos - neg << " zero) from " << pattern.edges().size()
      << " edge pixels -> " << a.out << '\n';
}

// train ------------------------------------------------------------------

struct TrainArgs {
  std::string data;
  std::string model_out;
  std::string loss_log;
  TrainConfig train;
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  int hidden_layers = 4;
  int hidden_width = 128;
  std::string activation = "algebraic";

  void add_options(Options& o) {
    o.add("epochs", train.epochs, "training epochs");
    o.add("batch-size", train.batch_size, "minibatch size");
    o.add("seed", train.seed, "init and shuffle seed (default: IEG_SEED or 1)");
    o.add("lr", lr, "Adam learning rate");
    o.add("beta1", beta1, "Adam beta1");
    o.add("beta2", beta2, "Adam beta2");
    o.add("adam-eps", adam_eps, "Adam epsilon");
    o.add("hidden-layers", hidden_layers, "number of hidden layers");
    o.add("hidden-width", hidden_width, "units per hidden layer");
    o.add("activation", activation, "algebraic or tanh");
    o.add("loss-log", loss_log, "loss history CSV (default: <model>.loss.csv)");
  }
};

void run_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  if (a.train.epochs < 0) throw InvalidArgument("--epochs must be >= 0");
  if (a.train.batch_size < 1) throw InvalidArgument("--batch-size must be positive");
  if (a.hidden_layers < 1 || a.hidden_width < 1) {
    throw InvalidArgument("--hidden-layers and --hidden-width must be positive");
  }
  if (!(a.lr >= 0.0) || !(a.beta1 >= 0.0 && a.beta1 < 1.0) || !(a.beta2 >= 0.0 && a.beta2 < 1.0) ||
      !(a.adam_eps > 0.0)) {
    throw InvalidArgument("Adam needs lr >= 0, beta1 and beta2 in [0, 1), eps > 0");
  }
  const Architecture arch{a.hidden_layers, a.hidden_width, activation_from_string(a.activation)};
  const auto data = read_training_set(a.data);
  if (data.empty()) throw InvalidArgument("training set '" + a.data + "' is empty");

  out << "train: lr=" << fixed(a.lr) << " beta1=" << fixed(a.beta1) << " beta2=" << fixed(a.beta2)
      << " eps=" << format_double(a.adam_eps) << " epochs=" << a.train.epochs
      << " batch_size=" << a.train.batch_size << " layers=" << a.hidden_layers << "x"
      << a.hidden_width << " activation=" << to_string(arch.activation) << " seed=" << a.train.seed
      << " samples=" << data.size() << " workers=" << workers() << '\n';

  const IegModel init = IegModel::create(arch, Normalization::from_samples(data), a.train.seed);
  AdamState adam = AdamState::for_model(init, a.lr, a.beta1, a.beta2, a.adam_eps);
  const TrainResult result = train(init, data, a.train, adam, [&err](int epoch, double loss) {
    err << "epoch " << epoch << " loss " << format_double(loss) << '\n';
  });
  save_model(result.model, a.model_out);

  const std::string log = a.loss_log.empty() ? a.model_out + ".loss.csv" : a.loss_log;
  std::ofstream csv(log);
  if (!csv) throw IoError("cannot write '" + log + "'");
  csv << "epoch,loss\n";
  for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
    csv << e + 1 << ',' << format_double(result.epoch_loss[e]) << '\n';
  }
  if (!csv) throw IoError("failed writing '" + log + "'");
  if (!result.epoch_loss.empty()) {
    out << "train: first epoch loss " << format_double(result.epoch_loss.front())
        << ", final epoch loss " << format_double(result.epoch_loss.back()) << '\n';
  }
  out << "train: model -> " << a.model_out << ", loss log -> " << log << '\n';
}

// simulate ---------------------------------------------------------------

struct SimulateArgs {
  std::string pattern = "builtin";
  std::string events_out;
  std::string truth_out;
  SimulationSpec spec;
  double duration = 0.1;
  double vx = 160.0;
  double vy = 120.0;
  double omega = 1.0;
  std::vector<std::string> segments;
  std::uint64_t seed = 1;
  double edge_threshold = Pattern::kDefaultEdgeThreshold;

  void add_options(Options& o) {
    o.add("width", spec.sensor_width, "sensor width (px)");
    o.add("height", spec.sensor_height, "sensor height (px)");
    o.add("x0", spec.initial_pose.tx, "initial pattern center x (px)");
    o.add("y0", spec.initial_pose.ty, "initial pattern center y (px)");
    o.add("r0", spec.initial_pose.r, "initial rotation (rad)");
    o.add("duration", duration, "duration of the single constant-velocity segment (s)");
    o.add("vx", vx, "body-frame velocity x (px/s)");
    o.add("vy", vy, "body-frame velocity y (px/s)");
    o.add("omega", omega, "angular velocity (rad/s)");
    o.add("segment", segments,
          "piecewise motion 'duration,vx,vy,omega' (repeatable, replaces --duration/--vx/--vy/--omega)");
    o.add("contrast", spec.contrast, "event firing threshold C");
    o.add("dt", spec.dt, "simulation step (s)");
    o.add("seed", seed, "random seed (default: IEG_SEED or 1)");
    o.add("edge-threshold", edge_threshold, "gradient magnitude that marks an edge pixel");
  }
};

MotionSegment parse_segment(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string field;
  while (std::getline(ss, field, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(field, &used));
      if (used != field.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw InvalidArgument("bad segment '" + text + "': expected duration,vx,vy,omega");
    }
  }
  if (v.size() != 4) throw InvalidArgument("bad segment '" + text + "': expected duration,vx,vy,omega");
  return {v[0], {v[1], v[2], v[3]}};
}

EventStream run_simulate(SimulateArgs a, std::ostream& out) {
  a.spec.segments.clear();
  if (a.segments.empty()) {
    a.spec.segments.push_back({a.duration, {a.vx, a.vy, a.omega}});
  } else {
    for (const auto& s : a.segments) a.spec.segments.push_back(parse_segment(s));
  }
  a.spec.validate();
  const Pattern pattern = pattern_from_arg(a.pattern, a.edge_threshold);
  EventStream stream = simulate_stream(pattern, a.spec, a.seed);
  write_events_csv(stream, a.events_out);
  write_truth_csv(stream.ground_truth, a.truth_out);
  out << "simulate: " << stream.events.size() << " events over " << format_double(stream.duration)
      << " s on a " << stream.width << "x" << stream.height << " sensor -> " << a.events_out
      << ", " << a.truth_out << '\n';
  return stream;
}

// track ------------------------------------------------------------------

struct TrackArgs {
  std::string model;
  std::string events;
  std::string out;
  TrackerConfig cfg;
  double x0 = std::numeric_limits<double>::quiet_NaN();
  double y0 = std::numeric_limits<double>::quiet_NaN();
  double r0 = 0.0;
  std::string polarity = "ignore";
  bool no_propagate = false;
  bool quiet = false;

  void add_options(Options& o) {
    o.add("x0", x0, "initial pose x (px), required");
    o.add("y0", y0, "initial pose y (px), required");
    o.add("r0", r0, "initial pose rotation (rad)");
    o.add("m", cfg.window_size, "events per window (M)");
    o.add("k", cfg.stride, "events between window starts (K)");
    o.add("lr", cfg.lr, "gradient descent step size");
    o.add("eps-bar", cfg.eps_bar, "stop when the loss decreases by less than this");
    o.add("max-iters", cfg.max_iters, "iteration cap per window");
    o.add("polarity", polarity, "ignore or match");
    o.flag("normalize-by-m", cfg.normalize_by_m, "average the loss over the window instead of summing");
    o.add("rotation-radius", cfg.rotation_radius, "step scale for r in px, 0 = from the events");
    o.add("velocity-horizon", cfg.velocity_horizon,
          "step scale for velocities in s, 0 = from the events");
    o.flag("no-propagate", no_propagate, "warm start from the previous pose without carrying it forward");
    o.add("min-final-fraction", cfg.min_final_fraction,
          "track a short final window if it holds this fraction of M");
    o.flag("quiet", quiet, "no per-window progress");
  }
};

Trajectory run_track(TrackArgs a, std::ostream& out, std::ostream& err) {
  if (std::isnan(a.x0) || std::isnan(a.y0)) throw InvalidArgument("--x0 and --y0 are required");
  a.cfg.polarity_mode = polarity_from(a.polarity);
  a.cfg.propagate_warm_start = !a.no_propagate;
  a.cfg.validate();
  const IegModel model = load_model(a.model);
  const EventStream stream = read_events_csv(a.events);
  const std::size_t windows = window_count(stream.events.size(), a.cfg);
  out << "track: M=" << a.cfg.window_size << " K=" << a.cfg.stride << " lr=" << fixed(a.cfg.lr)
      << " eps_bar=" << format_double(a.cfg.eps_bar) << " max_iters=" << a.cfg.max_iters
      << " polarity=" << a.polarity << " normalize_by_m=" << (a.cfg.normalize_by_m ? 1 : 0)
      << " events=" << stream.events.size() << " windows=" << windows << '\n';
  const Trajectory trajectory = slide_track(
      model, stream.events, {a.x0, a.y0, a.r0}, a.cfg,
      [&](std::size_t j, const TrackedWindow& w) {
        if (a.quiet) return;
        err << "window " << j + 1 << "/" << windows << " t=" << format_double(w.t_end)
            << " iters=" << w.state.iterations << " loss=" << format_double(w.state.final_loss)
            << " pose=(" << format_double(w.pose_at_end.tx) << ", "
            << format_double(w.pose_at_end.ty) << ", " << format_double(w.pose_at_end.r) << ")\n";
      });
  write_trajectory_csv(trajectory, a.out);
  out << "track: " << trajectory.windows.size() << " windows -> " << a.out << '\n';
  return trajectory;
}

// eval -------------------------------------------------------------------

struct EvalArgs {
  std::string trajectory;
  std::string truth;
  std::string json_out = "report.json";
  std::string timeseries;
  int cadence = 1;
  int m = 0;
  int k = 0;
  double w = 0.0;
  double lr = 0.0;

  void add_options(Options& o) {
    o.add("json", json_out, "report JSON path");
    o.add("timeseries", timeseries, "also write a time-series CSV (plus SVG charts) here");
    o.add("cadence", cadence, "score every n-th window");
    o.add("m", m, "window size to echo in the report (0 = omit the config echo)");
    o.add("k", k, "stride to echo in the report");
    o.add("w", w, "blur width to echo in the report");
    o.add("lr", lr, "tracker step size to echo in the report");
  }
};

ErrorReport run_eval(const EvalArgs& a, std::ostream& out) {
  const Trajectory trajectory = read_trajectory_csv(a.trajectory);
  const auto truth = read_truth_csv(a.truth);
  std::optional<RunEcho> echo;
  if (a.m > 0) echo = RunEcho{a.m, a.k, a.w, a.lr};
  const ErrorReport report = align_and_score(trajectory, truth, a.cadence, echo);
  write_report_json(report, a.json_out);
  if (!a.timeseries.empty()) emit_timeseries(trajectory, truth, a.timeseries);
  out << report_table(report);
  return report;
}

// demo -------------------------------------------------------------------

struct DemoArgs {
  std::string out_dir = "ieg_demo";
  std::uint64_t seed = 1;
  GenDataArgs gen;
  TrainArgs train;
  SimulateArgs sim;
  TrackArgs track;
  double offset_px = 5.0;
  double offset_rad = 0.05;

  // The demo reproduces the synthetic tracking scenario: about 137 windows.
  DemoArgs() {
    sim.duration = 0.025;
    track.cfg.stride = 500;
    track.polarity = "match";
  }

  void add_options(Options& o) {
    o.add("out-dir", out_dir, "directory for all produced files");
    o.add("seed", seed, "seed for every stage (default: IEG_SEED or 1)");
    o.add("samples", gen.n, "training samples");
    o.add("w", gen.synth.w, "blur radius (px)");
    o.add("sigma", gen.synth.sigma, "Gaussian blur standard deviation (px)");
    o.add("epochs", train.train.epochs, "training epochs");
    o.add("batch-size", train.train.batch_size, "minibatch size");
    o.add("hidden-layers", train.hidden_layers, "number of hidden layers");
    o.add("hidden-width", train.hidden_width, "units per hidden layer");
    o.add("activation", train.activation, "algebraic or tanh");
    o.add("train-lr", train.lr, "Adam learning rate");
    o.add("duration", sim.duration, "simulated duration (s)");
    o.add("vx", sim.vx, "body-frame velocity x (px/s)");
    o.add("vy", sim.vy, "body-frame velocity y (px/s)");
    o.add("omega", sim.omega, "angular velocity (rad/s)");
    o.add("contrast", sim.spec.contrast, "event firing threshold C");
    o.add("m", track.cfg.window_size, "events per window (M)");
    o.add("k", track.cfg.stride, "events between window starts (K)");
    o.add("max-iters", track.cfg.max_iters, "iteration cap per window");
    o.add("lr", track.cfg.lr, "tracker gradient descent step size");
    o.add("eps-bar", track.cfg.eps_bar, "tracker stopping threshold");
    o.add("polarity", track.polarity, "tracker loss: ignore or match");
    o.add("rotation-radius", track.cfg.rotation_radius, "step scale for r in px, 0 = from the events");
    o.add("velocity-horizon", track.cfg.velocity_horizon,
          "step scale for velocities in s, 0 = from the events");
    o.add("offset-px", offset_px, "initial position error along x and y (px)");
    o.add("offset-rad", offset_rad, "initial rotation error (rad)");
  }
};

void run_demo(DemoArgs a, std::ostream& out, std::ostream& err) {
  const fs::path dir(a.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + a.out_dir + "': " + ec.message());
  out << "demo: built-in " << make_marker_pattern().width() << "x"
      << make_marker_pattern().height() << " marker, seed " << a.seed << ", workers " << workers()
      << " -> " << a.out_dir << '\n';
  write_pgm(make_marker_pattern(), dir / "pattern.pgm");

  a.gen.pattern = "builtin";
  a.gen.out = (dir / "train.iegd").string();
  a.gen.seed = a.seed;
  run_gen_data(a.gen, out);

  a.train.data = a.gen.out;
  a.train.model_out = (dir / "model.iegm").string();
  a.train.loss_log = (dir / "loss.csv").string();
  a.train.train.seed = a.seed;
  run_train(a.train, out, err);

  a.sim.pattern = "builtin";
  a.sim.events_out = (dir / "events.csv").string();
  a.sim.truth_out = (dir / "truth.csv").string();
  a.sim.seed = a.seed;
  run_simulate(a.sim, out);

  a.track.model = a.train.model_out;
  a.track.events = a.sim.events_out;
  a.track.out = (dir / "trajectory.csv").string();
  a.track.x0 = a.sim.spec.initial_pose.tx + a.offset_px;
  a.track.y0 = a.sim.spec.initial_pose.ty + a.offset_px;
  a.track.r0 = a.sim.spec.initial_pose.r + a.offset_rad;
  run_track(a.track, out, err);

  EvalArgs e;
  e.trajectory = a.track.out;
  e.truth = a.sim.truth_out;
  e.json_out = (dir / "report.json").string();
  e.timeseries = (dir / "timeseries.csv").string();
  e.m = a.track.cfg.window_size;
  e.k = a.track.cfg.stride;
  e.w = a.gen.synth.w;
  e.lr = a.track.cfg.lr;
  run_eval(e, out);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Implicit event generator: training data, training, simulation, tracking, evaluation"};
  app.name("ieg");
  app.require_subcommand(1);

  std::string config_path;
  int worker_count = 0;
  app.add_option("--config", config_path, "JSON config; explicit flags override it");
  app.add_option("--workers", worker_count, "OpenMP threads (default: runtime default; 1 is the reproducible reference)");

  std::uint64_t seed = 1;
  std::optional<std::string> seed_error;
  try {
    seed = default_seed();
  } catch (const InvalidArgument& e) {
    seed_error = e.what();
  }

  GenDataArgs gen;
  gen.seed = seed;
  auto* gen_cmd = app.add_subcommand("gen-data", "generate a blurred intensity-change training set");
  gen_cmd->add_option("pattern", gen.pattern, "pattern image (PGM/PNG) or 'builtin'")->required();
  gen_cmd->add_option("out", gen.out, "output training set (.iegd)")->required();
  Options gen_opts(gen_cmd);
  gen.add_options(gen_opts);

  TrainArgs tr;
  tr.train.seed = seed;
  auto* train_cmd = app.add_subcommand("train", "train the generator MLP with Adam");
  train_cmd->add_option("data", tr.data, "training set (.iegd)")->required();
  train_cmd->add_option("model", tr.model_out, "output model (.iegm)")->required();
  Options train_opts(train_cmd);
  tr.add_options(train_opts);

  SimulateArgs sim;
  sim.seed = seed;
  auto* sim_cmd = app.add_subcommand("simulate", "simulate the event stream of a moving pattern");
  sim_cmd->add_option("pattern", sim.pattern, "pattern image (PGM/PNG) or 'builtin'")->required();
  sim_cmd->add_option("events", sim.events_out, "output event CSV")->required();
  sim_cmd->add_option("truth", sim.truth_out, "output ground-truth CSV")->required();
  Options sim_opts(sim_cmd);
  sim.add_options(sim_opts);

  TrackArgs trk;
  auto* track_cmd = app.add_subcommand("track", "track the pattern through an event stream");
  track_cmd->add_option("model", trk.model, "trained model (.iegm)")->required();
  track_cmd->add_option("events", trk.events, "event CSV")->required();
  track_cmd->add_option("out", trk.out, "output trajectory CSV")->required();
  Options track_opts(track_cmd);
  trk.add_options(track_opts);

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "score a trajectory against ground truth");
  eval_cmd->add_option("trajectory", ev.trajectory, "trajectory CSV")->required();
  eval_cmd->add_option("truth", ev.truth, "ground-truth CSV")->required();
  Options eval_opts(eval_cmd);
  ev.add_options(eval_opts);

  DemoArgs demo;
  demo.seed = seed;
  auto* demo_cmd = app.add_subcommand("demo", "run gen-data, train, simulate, track and eval on the built-in marker");
  Options demo_opts(demo_cmd);
  demo.add_options(demo_opts);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (seed_error) throw InvalidArgument(*seed_error);
    if (app.get_option("--workers")->count() > 0) set_workers(worker_count);
    const json config = load_config(config_path);
    if (gen_cmd->parsed()) {
      gen_opts.apply(config);
      run_gen_data(gen, out);
    } else if (train_cmd->parsed()) {
      train_opts.apply(config);
      run_train(tr, out, err);
    } else if (sim_cmd->parsed()) {
      sim_opts.apply(config);
      run_simulate(sim, out);
    } else if (track_cmd->parsed()) {
      track_opts.apply(config);
      run_track(trk, out, err);
    } else if (eval_cmd->parsed()) {
      eval_opts.apply(config);
      run_eval(ev, out);
    } else if (demo_cmd->parsed()) {
      demo_opts.apply(config);
      run_demo(demo, out, err);
    }
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitOk;
}

}  // namespace ieg::cli
