#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <sstream>

#include <json.hpp>

#include "ieg/cli.hpp"
#include "ieg/eval.hpp"
#include "ieg/model.hpp"
#include "ieg/stream_io.hpp"
#include "ieg/tracker.hpp"
#include "test_util.hpp"

using namespace ieg;
using testutil::slurp;
using testutil::spit;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string p(const std::filesystem::path& path) { return path.string(); }

// Small artifacts shared by the tests: a training set, a tiny model and a
// short simulated stream.
class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new testutil::TempDir("cli");
    auto r = run({"gen-data", "builtin", p(*dir_ / "d.iegd"), "--n", "3000", "--seed", "5"});
    ASSERT_EQ(r.code, 0) << r.err;
    r = run({"train", p(*dir_ / "d.iegd"), p(*dir_ / "m.iegm"), "--epochs", "2", "--hidden-layers",
             "1", "--hidden-width", "8", "--batch-size", "64"});
    ASSERT_EQ(r.code, 0) << r.err;
    r = run({"simulate", "builtin", p(*dir_ / "ev.csv"), p(*dir_ / "gt.csv"), "--duration", "0.007"});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }
  static std::filesystem::path f(const std::string& name) { return *dir_ / name; }

  static testutil::TempDir* dir_;
};
testutil::TempDir* Cli::dir_ = nullptr;

std::vector<std::string> track_args(const std::string& model, const std::string& events,
                                    const std::string& out, const std::string& m = "2000",
                                    const std::string& k = "1000", const std::string& iters = "3") {
  return {"track", model, events, out, "--x0", "120", "--y0", "90", "--m", m,
          "--k", k, "--max-iters", iters, "--quiet"};
}

}  // namespace

TEST(CliBasics, HelpOnEverySubcommand) {
  for (const char* cmd : {"gen-data", "train", "simulate", "track", "eval", "demo"}) {
    const Result r = run({cmd, "--help"});
    EXPECT_EQ(r.code, 0) << cmd;
    EXPECT_NE(r.out.find("--"), std::string::npos) << cmd;
  }
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(CliBasics, UsageErrors) {
  EXPECT_EQ(run({}).code, cli::kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"train", "only-one-arg"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"gen-data", "builtin", "x.iegd", "--n", "lots"}).code, cli::kExitUsage);
}

TEST_F(Cli, TrackRejectsBadStrideAndMissingFiles) {
  Result r = run(track_args(p(f("m.iegm")), p(f("ev.csv")), p(f("t.csv")), "2000", "0"));
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("error:"), std::string::npos);

  r = run(track_args(p(f("m.iegm")), p(f("no_such.csv")), p(f("t.csv"))));
  EXPECT_EQ(r.code, cli::kExitIo);
  EXPECT_NE(r.err.find("no_such.csv"), std::string::npos);

  r = run({"track", p(f("m.iegm")), p(f("ev.csv")), p(f("t.csv"))});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("--x0"), std::string::npos);
}

TEST_F(Cli, MalformedTruthRowNamesItsLine) {
  std::string gt = slurp(f("gt.csv"));
  // Corrupt the fourth line.
  std::size_t pos = 0;
  for (int i = 0; i < 3; ++i) pos = gt.find('\n', pos) + 1;
  gt.insert(pos, "garbage,");
  spit(f("bad_gt.csv"), gt);
  const std::string tr = p(f("eval_t.csv"));
  ASSERT_EQ(run(track_args(p(f("m.iegm")), p(f("ev.csv")), tr)).code, 0);
  const Result r = run({"eval", tr, p(f("bad_gt.csv")), "--json", p(f("bad.json"))});
  EXPECT_EQ(r.code, cli::kExitIo);
  EXPECT_NE(r.err.find("bad_gt.csv:4"), std::string::npos) << r.err;
}

TEST_F(Cli, TrainBannerAndZeroEpochs) {
  const Result r = run({"train", p(f("d.iegd")), p(f("z.iegm")), "--epochs", "0", "--hidden-layers",
                        "1", "--hidden-width", "8", "--seed", "9"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("lr=0.0001"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("beta1=0.9 "), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("beta2=0.999"), std::string::npos) << r.out;
  const auto data = read_training_set(f("d.iegd"));
  const IegModel init = IegModel::create({1, 8, Activation::kAlgebraic},
                                         Normalization::from_samples(data), 9);
  const IegModel saved = load_model(f("z.iegm"));
  EXPECT_TRUE(std::ranges::equal(saved.params(), init.params()));
  EXPECT_EQ(slurp(f("z.iegm.loss.csv")), "epoch,loss\n");
}

TEST_F(Cli, ConfigFilePrecedence) {
  spit(f("cfg.json"), R"({"epochs": 1, "hidden_width": 4, "train": {"hidden-width": 6, "seed": 3}})");
  // Section beats top level; explicit flags beat both.
  Result r = run({"--config", p(f("cfg.json")), "train", p(f("d.iegd")), p(f("c.iegm")),
                  "--hidden-layers", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("epochs=1 "), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("layers=1x6 "), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("seed=3 "), std::string::npos) << r.out;
  r = run({"--config", p(f("cfg.json")), "train", p(f("d.iegd")), p(f("c.iegm")),
           "--hidden-layers", "1", "--hidden-width", "5", "--epochs", "0"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("epochs=0 "), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("layers=1x5 "), std::string::npos) << r.out;

  spit(f("bad_cfg.json"), R"({"epochs": "many"})");
  EXPECT_EQ(run({"--config", p(f("bad_cfg.json")), "train", p(f("d.iegd")), p(f("c.iegm"))}).code,
            cli::kExitUsage);
  spit(f("broken.json"), "{");
  EXPECT_EQ(run({"--config", p(f("broken.json")), "train", p(f("d.iegd")), p(f("c.iegm"))}).code,
            cli::kExitIo);
}

TEST(CliGenData, DefaultSizeAndByteIdenticalReruns) {
  testutil::TempDir dir("gen");
  ASSERT_EQ(run({"gen-data", "builtin", p(dir / "a.iegd")}).code, 0);
  EXPECT_EQ(read_training_set(dir / "a.iegd").size(), 200000u);
  ASSERT_EQ(run({"gen-data", "builtin", p(dir / "b.iegd")}).code, 0);
  EXPECT_EQ(slurp(dir / "a.iegd"), slurp(dir / "b.iegd"));
  ASSERT_EQ(run({"--workers", "1", "gen-data", "builtin", p(dir / "c.iegd"), "--n", "5000", "--seed", "8"}).code, 0);
  ASSERT_EQ(run({"--workers", "2", "gen-data", "builtin", p(dir / "d.iegd"), "--n", "5000", "--seed", "8"}).code, 0);
  EXPECT_EQ(slurp(dir / "c.iegd"), slurp(dir / "d.iegd"));
}

TEST(CliGenData, SeedFromEnvironment) {
  testutil::TempDir dir("env");
  ::setenv("IEG_SEED", "8", 1);
  const Result r = run({"gen-data", "builtin", p(dir / "env.iegd"), "--n", "2000"});
  ::setenv("IEG_SEED", "x8", 1);
  const Result bad = run({"gen-data", "builtin", p(dir / "bad.iegd"), "--n", "2000"});
  ::unsetenv("IEG_SEED");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(bad.code, cli::kExitUsage);
  ASSERT_EQ(run({"gen-data", "builtin", p(dir / "flag.iegd"), "--n", "2000", "--seed", "8"}).code, 0);
  ASSERT_EQ(run({"gen-data", "builtin", p(dir / "one.iegd"), "--n", "2000"}).code, 0);
  EXPECT_EQ(slurp(dir / "env.iegd"), slurp(dir / "flag.iegd"));
  EXPECT_NE(slurp(dir / "env.iegd"), slurp(dir / "one.iegd"));
}

TEST(CliSimulate, ZeroMotionAndSortedOutput) {
  testutil::TempDir dir("sim");
  Result r = run({"simulate", "builtin", p(dir / "e.csv"), p(dir / "g.csv"), "--vx", "0", "--vy",
                  "0", "--omega", "0", "--duration", "0.01"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(read_events_csv(dir / "e.csv").events.empty());
  EXPECT_GE(read_truth_csv(dir / "g.csv").size(), 2u);

  r = run({"simulate", "builtin", p(dir / "e2.csv"), p(dir / "g2.csv"), "--segment",
           "0.002,200,0,0", "--segment", "0.002,0,-150,2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const EventStream s = read_events_csv(dir / "e2.csv");
  EXPECT_GT(s.events.size(), 100u);
  EXPECT_NEAR(s.duration, 0.004, 1e-12);
  EXPECT_EQ(run({"simulate", "builtin", p(dir / "e3.csv"), p(dir / "g3.csv"), "--segment", "1,2,3"}).code,
            cli::kExitUsage);
}

TEST_F(Cli, TrackEchoesConfigAndIsReproducible) {
  Result r = run(track_args(p(f("m.iegm")), p(f("ev.csv")), p(f("a.csv")), "20000", "300", "2"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("M=20000 K=300 lr="), std::string::npos) << r.out;

  ASSERT_EQ(run(track_args(p(f("m.iegm")), p(f("ev.csv")), p(f("b1.csv")))).code, 0);
  ASSERT_EQ(run(track_args(p(f("m.iegm")), p(f("ev.csv")), p(f("b2.csv")))).code, 0);
  EXPECT_EQ(slurp(f("b1.csv")), slurp(f("b2.csv")));
  const Trajectory tr = read_trajectory_csv(f("b1.csv"));
  const std::size_t n = read_events_csv(f("ev.csv")).events.size();
  TrackerConfig cfg;
  cfg.window_size = 2000;
  cfg.stride = 1000;
  EXPECT_EQ(tr.windows.size(), window_count(n, cfg));
}

TEST_F(Cli, EvalOfTruthIsAllZero) {
  const auto gt = read_truth_csv(f("gt.csv"));
  Trajectory tr;
  for (std::size_t i = 1; i < gt.size(); i += 3) {
    TrackedWindow w;
    w.t_start = w.t_end = gt[i].t;
    w.pose_at_end = gt[i].pose;
    w.state.pose = gt[i].pose;
    w.state.velocity = gt[i].velocity;
    w.state.iterations = 7;
    tr.windows.push_back(w);
  }
  write_trajectory_csv(tr, f("truth_traj.csv"));
  const Result r = run({"eval", p(f("truth_traj.csv")), p(f("gt.csv")), "--json", p(f("zero.json")),
                        "--m", "20000", "--k", "500", "--w", "6", "--lr", "0.0001"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(slurp(f("zero.json")));
  for (const char* c : kComponentNames) EXPECT_EQ(j["mse"][c].get<double>(), 0.0) << c;
  EXPECT_EQ(j["config"]["stride"], 500);
  EXPECT_NE(r.out.find("windows"), std::string::npos);
}

TEST(CliDemo, SmallRunProducesEverything) {
  testutil::TempDir dir("demo");
  const Result r = run({"--workers", "1", "demo", "--out-dir", p(dir.path()), "--samples", "2000",
                        "--epochs", "1", "--hidden-layers", "1", "--hidden-width", "8",
                        "--duration", "0.004", "--m", "2000", "--k", "1000", "--max-iters", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* name : {"pattern.pgm", "train.iegd", "model.iegm", "loss.csv", "events.csv",
                           "truth.csv", "trajectory.csv", "report.json", "timeseries.csv",
                           "timeseries_x.svg"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / name)) << name;
  }
}
