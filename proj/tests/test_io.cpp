#include <gtest/gtest.h>

#include <cstring>
#include <random>

#include "ieg/error.hpp"
#include "ieg/model.hpp"
#include "ieg/stream_io.hpp"
#include "ieg/tracker.hpp"
#include "test_util.hpp"

using namespace ieg;
using testutil::TempDir;

namespace {

template <class F>
std::string io_error_message(F&& f) {
  try {
    f();
  } catch (const IoError& e) {
    return e.what();
  }
  return "<no IoError>";
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

}  // namespace

TEST(FormatDouble, ShortestRoundTrip) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 10000; ++i) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 20) - 10);
    EXPECT_EQ(std::stod(format_double(v)), v);
    EXPECT_EQ(std::stod(format_double(v, true)), v);
    EXPECT_EQ(format_double(v, true).find('e'), std::string::npos);
  }
  EXPECT_EQ(format_double(0.0001, true), "0.0001");
  EXPECT_EQ(format_double(0.0001), "1e-04");
  EXPECT_EQ(format_double(20000.0), "20000");
}

TEST(EventCsv, RoundTrip) {
  TempDir dir("ev");
  EventStream s;
  s.width = 240;
  s.height = 180;
  s.duration = 0.0125;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> dt(0, 1e-6);
  double t = 0;
  for (int i = 0; i < 2000; ++i) {
    t += dt(rng);
    s.events.push_back({t, double(rng() % 240), double(rng() % 180), rng() % 2 ? 1 : -1});
  }
  write_events_csv(s, dir / "e.csv");
  const EventStream r = read_events_csv(dir / "e.csv");
  EXPECT_EQ(r.width, 240);
  EXPECT_EQ(r.height, 180);
  EXPECT_EQ(r.duration, 0.0125);
  EXPECT_EQ(r.events, s.events);
}

TEST(EventCsv, HeaderOnlyIsEmpty) {
  TempDir dir("ev0");
  testutil::spit(dir / "e.csv", "t,x,y,p\n");
  EXPECT_TRUE(read_events_csv(dir / "e.csv").events.empty());
}

TEST(EventCsv, ErrorsNameTheLine) {
  TempDir dir("everr");
  testutil::spit(dir / "a.csv", "t,x,y,p\n0.1,3,4,1\n0.2,3,oops,1\n");
  auto msg = io_error_message([&] { read_events_csv(dir / "a.csv"); });
  EXPECT_TRUE(contains(msg, "a.csv:3:")) << msg;

  testutil::spit(dir / "b.csv", "t,x,y,p\n0.1,3,4,1\n0.05,3,4,1\n");
  msg = io_error_message([&] { read_events_csv(dir / "b.csv"); });
  EXPECT_TRUE(contains(msg, ":3:") && contains(msg, "sorted")) << msg;

  testutil::spit(dir / "c.csv", "t,x,y,p\n0.1,3,4,0\n");
  msg = io_error_message([&] { read_events_csv(dir / "c.csv"); });
  EXPECT_TRUE(contains(msg, ":2:") && contains(msg, "polarity")) << msg;

  testutil::spit(dir / "d.csv", "time,x,y,p\n");
  msg = io_error_message([&] { read_events_csv(dir / "d.csv"); });
  EXPECT_TRUE(contains(msg, ":1:") && contains(msg, "header")) << msg;

  testutil::spit(dir / "e.csv", "t,x,y,p\n0.1,3,4\n");
  msg = io_error_message([&] { read_events_csv(dir / "e.csv"); });
  EXPECT_TRUE(contains(msg, ":2:") && contains(msg, "fields")) << msg;

  testutil::spit(dir / "f.csv", "# width=10 height=10\nt,x,y,p\n0.1,30,4,1\n");
  msg = io_error_message([&] { read_events_csv(dir / "f.csv"); });
  EXPECT_TRUE(contains(msg, ":3:") && contains(msg, "sensor")) << msg;

  EXPECT_THROW(read_events_csv(dir / "missing.csv"), IoError);
}

TEST(TruthCsv, RoundTrip) {
  TempDir dir("gt");
  std::vector<TruthSample> gt;
  for (int i = 0; i < 100; ++i) {
    const double t = i * 1e-5;
    gt.push_back({t, {120 + 0.1 * i, 90 - 0.3 * i, 1e-3 * i}, {160, 120, 1.0 / 3}});
  }
  write_truth_csv(gt, dir / "gt.csv");
  const auto r = read_truth_csv(dir / "gt.csv");
  ASSERT_EQ(r.size(), gt.size());
  for (std::size_t i = 0; i < gt.size(); ++i) {
    EXPECT_EQ(r[i].t, gt[i].t);
    EXPECT_EQ(r[i].pose, gt[i].pose);
    EXPECT_EQ(r[i].velocity, gt[i].velocity);
  }
}

TEST(TrainingSetFile, RoundTripAndLayout) {
  TempDir dir("ds");
  std::vector<TrainingSample> s(37);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (auto& x : s) {
    for (double& v : x.input) v = u(rng) * 100;
    x.target = u(rng);
  }
  write_training_set(s, dir / "d.iegd");
  EXPECT_EQ(std::filesystem::file_size(dir / "d.iegd"), 16u + 37u * 56u);
  const std::string bytes = testutil::slurp(dir / "d.iegd");
  EXPECT_EQ(bytes.substr(0, 4), "IEGD");
  double first;
  std::memcpy(&first, bytes.data() + 16, 8);
  EXPECT_EQ(first, s[0].input[0]);
  EXPECT_EQ(read_training_set(dir / "d.iegd"), s);
}

TEST(TrainingSetFile, Corruption) {
  TempDir dir("dsbad");
  std::vector<TrainingSample> s(4);
  write_training_set(s, dir / "d.iegd");
  std::string bytes = testutil::slurp(dir / "d.iegd");

  std::string bad = bytes;
  bad[0] = 'X';
  testutil::spit(dir / "magic.iegd", bad);
  EXPECT_TRUE(contains(io_error_message([&] { read_training_set(dir / "magic.iegd"); }), "magic"));

  bad = bytes;
  bad[4] = 9;
  testutil::spit(dir / "ver.iegd", bad);
  EXPECT_TRUE(contains(io_error_message([&] { read_training_set(dir / "ver.iegd"); }), "version"));

  testutil::spit(dir / "short.iegd", bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(read_training_set(dir / "short.iegd"), IoError);

  bad = bytes;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::memcpy(bad.data() + 16 + 56 + 8, &nan, 8);
  testutil::spit(dir / "nan.iegd", bad);
  EXPECT_TRUE(contains(io_error_message([&] { read_training_set(dir / "nan.iegd"); }), "offset 72"));
}

TEST(ModelFile, RoundTripIsBitExact) {
  TempDir dir("model");
  std::mt19937_64 rng(4);
  for (auto act : {Activation::kAlgebraic, Activation::kTanh}) {
    const IegModel m = testutil::random_model(rng, 3, 24, act);
    save_model(m, dir / "m.iegm");
    const IegModel r = load_model(dir / "m.iegm");
    EXPECT_EQ(r, m);
    for (int i = 0; i < 100; ++i) {
      const Input6 x = testutil::random_input(rng);
      EXPECT_EQ(forward(r, x), forward(m, x));
    }
    // Layout: magic, version, tag, layer count, dims.
    const std::string b = testutil::slurp(dir / "m.iegm");
    EXPECT_EQ(b.substr(0, 4), "IEGM");
    EXPECT_EQ(static_cast<std::uint8_t>(b[8]), static_cast<std::uint8_t>(act));
    EXPECT_EQ(static_cast<std::uint8_t>(b[9]), 4);
    EXPECT_EQ(b.size(), 4u + 4 + 1 + 1 + 5 * 4 + m.param_count() * 8 + 12 * 8 + 4);
  }
}

TEST(ModelFile, RejectsDamage) {
  TempDir dir("modelbad");
  std::mt19937_64 rng(5);
  save_model(testutil::random_model(rng), dir / "m.iegm");
  const std::string bytes = testutil::slurp(dir / "m.iegm");

  std::string bad = bytes;
  bad[1] = 'X';
  testutil::spit(dir / "magic.iegm", bad);
  EXPECT_TRUE(contains(io_error_message([&] { load_model(dir / "magic.iegm"); }), "magic"));

  bad = bytes;
  bad[4] = 2;  // a future version
  testutil::spit(dir / "ver.iegm", bad);
  EXPECT_TRUE(contains(io_error_message([&] { load_model(dir / "ver.iegm"); }), "version"));

  bad = bytes;
  bad[bytes.size() / 2] ^= 0x10;
  testutil::spit(dir / "crc.iegm", bad);
  EXPECT_TRUE(contains(io_error_message([&] { load_model(dir / "crc.iegm"); }), "checksum"));

  for (std::size_t cut : {std::size_t{2}, std::size_t{7}, std::size_t{20}, bytes.size() - 1}) {
    testutil::spit(dir / "cut.iegm", bytes.substr(0, cut));
    EXPECT_THROW(load_model(dir / "cut.iegm"), IoError) << "cut at " << cut;
  }
  EXPECT_THROW(load_model(dir / "none.iegm"), IoError);
}

TEST(TrajectoryCsv, RoundTrip) {
  TempDir dir("traj");
  Trajectory tr;
  for (int i = 0; i < 5; ++i) {
    TrackedWindow w;
    w.t_start = 0.001 * i;
    w.t_end = 0.001 * i + 0.0057;
    w.pose_at_end = {100.0 + i / 3.0, 80.0 - i / 7.0, 0.01 * i};
    w.state.velocity = {150.0 + i, 120.0 - i, 1.0 + i / 9.0};
    w.state.iterations = 10 + i;
    w.state.final_loss = 1500.25 + i;
    tr.windows.push_back(w);
  }
  write_trajectory_csv(tr, dir / "t.csv");
  const Trajectory r = read_trajectory_csv(dir / "t.csv");
  ASSERT_EQ(r.windows.size(), 5u);
  for (int i = 0; i < 5; ++i) {
    EXPECT_EQ(r.windows[i].t_end, tr.windows[i].t_end);
    EXPECT_EQ(r.windows[i].pose_at_end, tr.windows[i].pose_at_end);
    EXPECT_EQ(r.windows[i].state.velocity, tr.windows[i].state.velocity);
    EXPECT_EQ(r.windows[i].state.iterations, tr.windows[i].state.iterations);
    EXPECT_EQ(r.windows[i].state.final_loss, tr.windows[i].state.final_loss);
  }
  testutil::spit(dir / "bad.csv", "t,tx,ty,r,vx,vy,omega,iters,loss\n0.1,1,2,3,4,5,6,2.5,1\n");
  EXPECT_TRUE(contains(io_error_message([&] { read_trajectory_csv(dir / "bad.csv"); }), ":2:"));
}
