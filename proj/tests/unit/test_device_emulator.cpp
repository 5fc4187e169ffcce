#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <random>
#include <thread>

#include "loco/device_emulator.hpp"
#include "loco/error.hpp"

using namespace loco;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no loco::Error thrown";
  return ErrorKind::InvalidState;
}

long sum_deltas(const std::vector<EncoderFrame>& frames) {
  long s = 0;
  for (const auto& f : frames) s += f.treadmill_delta;
  return s;
}

// Composite Simpson over [a, b] of the trace's belt speed, split at every
// keyframe so each piece is smooth.
double simpson_travel(const InputTrace& trace, double a, double b) {
  std::vector<double> cuts{a};
  for (const auto& k : trace.keys())
    if (k.time_s > a && k.time_s < b) cuts.push_back(k.time_s);
  cuts.push_back(b);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i], hi = cuts[i + 1];
    const int n = 64;
    const double h = (hi - lo) / n;
    // Midpoints avoid sampling exactly at a step discontinuity.
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += trace.belt_speed_at(lo + (j + 0.5) * h);
    total += s * h;
  }
  return total;
}

}  // namespace

TEST(Quantize, Examples) {
  DeviceCalibration c;
  EXPECT_EQ(quantize_handlebar(0.0, c), 8192);
  EXPECT_EQ(quantize_handlebar(90.0, c), 12288);
  EXPECT_EQ(quantize_handlebar(0.01, c), 8192);
  EXPECT_EQ(quantize_handlebar(-90.0, c), 4096);
  EXPECT_EQ(quantize_handlebar(180.0, c), 0);
  EXPECT_EQ(quantize_handlebar(360.0 + 90.0, c), 12288);
}

TEST(Quantize, ErrorWithinHalfCount) {
  DeviceCalibration c;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> deg(-179.0, 179.0);
  const double count = 360.0 / 16384.0;
  for (int i = 0; i < 20000; ++i) {
    const double a = deg(rng);
    const int raw = quantize_handlebar(a, c);
    ASSERT_GE(raw, 0);
    ASSERT_LE(raw, 16383);
    const double back = (raw - 8192) * count;
    ASSERT_LE(std::abs(back - a), count / 2 + 1e-12) << a;
  }
}

TEST(BeltCounts, Examples) {
  DeviceCalibration c;
  auto s = belt_to_counts(1.0, 0.01, 0.0, c);
  EXPECT_EQ(s.delta, 20);
  EXPECT_NEAR(s.accumulator, 0.0, 1e-12);

  s = belt_to_counts(0.123, 0.01, 0.0, c);
  EXPECT_EQ(s.delta, 2);
  EXPECT_NEAR(s.accumulator, 0.46, 1e-9);

  long total = 0;
  double acc = 0.0;
  for (int i = 0; i < 100; ++i) {
    s = belt_to_counts(0.123, 0.01, acc, c);
    total += s.delta;
    acc = s.accumulator;
  }
  EXPECT_LE(std::abs(total - 246), 1);
}

TEST(BeltCounts, BackwardTruncatesTowardZero) {
  DeviceCalibration c;
  const auto s = belt_to_counts(-0.123, 0.01, 0.0, c);
  EXPECT_EQ(s.delta, -2);
  EXPECT_NEAR(s.accumulator, -0.46, 1e-9);
}

TEST(RunTrace, ConstantNeutral) {
  InputTrace t({{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}}, Interpolation::Step);
  const auto frames = run_trace(t, {});
  ASSERT_EQ(frames.size(), 100u);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    EXPECT_EQ(frames[i].seq, i);
    EXPECT_EQ(frames[i].handlebar_raw, 8192);
    EXPECT_EQ(frames[i].treadmill_delta, 0);
    EXPECT_TRUE(frames[i].absolute_valid());
  }
}

TEST(RunTrace, StepAtHalfSecond) {
  InputTrace t({{0.0, 0.0, 0.0}, {0.5, 90.0, 0.0}, {1.0, 90.0, 0.0}}, Interpolation::Step);
  const auto frames = run_trace(t, {});
  ASSERT_EQ(frames.size(), 100u);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(frames[i].handlebar_raw, 8192) << i;
  for (int i = 50; i < 100; ++i) EXPECT_EQ(frames[i].handlebar_raw, 12288) << i;
}

TEST(RunTrace, LinearRampCounts) {
  InputTrace t({{0.0, 0.0, 0.0}, {1.0, 0.0, 1.0}}, Interpolation::Linear);
  const auto frames = run_trace(t, {});
  ASSERT_EQ(frames.size(), 100u);
  const double expected = 2000.0 * simpson_travel(t, 0.0, 1.0);
  EXPECT_NEAR(expected, 1000.0, 1e-9);
  EXPECT_LE(std::abs(sum_deltas(frames) - expected), 1.0);
}

TEST(RunTrace, TimestampsAndSequence) {
  InputTrace t({{0.0, 0.0, 0.0}, {2.0, 0.0, 0.0}}, Interpolation::Linear);
  const auto frames = run_trace(t, {});
  for (std::size_t i = 1; i < frames.size(); ++i) {
    EXPECT_EQ(frames[i].seq, frames[i - 1].seq + 1);
    EXPECT_GE(frames[i].device_time_ms, frames[i - 1].device_time_ms);
  }
  EXPECT_EQ(frames[37].device_time_ms, 370u);
}

TEST(RunTrace, EmptyTraceRejected) {
  EXPECT_EQ(kind_of([] { run_trace(InputTrace{}, {}); }), ErrorKind::InvalidTrace);
}

TEST(RunTrace, Deterministic) {
  InputTrace t({{0.0, -20.0, 0.3}, {0.7, 35.5, 0.9}, {1.3, 5.0, -0.4}}, Interpolation::Linear);
  EXPECT_EQ(run_trace(t, {}), run_trace(t, {}));
}

// Count conservation on random traces, both interpolation modes.
TEST(RunTrace, CountConservationProperty) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> speed(-1.5, 1.5), deg(-90, 90);
  for (int trial = 0; trial < 200; ++trial) {
    const auto mode = trial % 2 ? Interpolation::Step : Interpolation::Linear;
    std::vector<TraceKey> keys;
    int tick = 0;
    for (int k = 0; k < 8; ++k) {
      keys.push_back({tick / 100.0, deg(rng), speed(rng)});
      tick += 1 + static_cast<int>(rng() % 150);
    }
    InputTrace t(keys, mode);
    const auto frames = run_trace(t, {});
    const double n = static_cast<double>(frames.size());
    const double expected = 2000.0 * simpson_travel(t, 0.0, n / 100.0);
    ASSERT_LE(std::abs(sum_deltas(frames) - expected), 1.0 + 1e-6) << "trial " << trial;
  }
}

TEST(TraceFile, ParseAndFormat) {
  const auto t = parse_trace(
      "# demo\n"
      "mode: step\n"
      "0 0 0\n"
      "0.5   90 0.25  # turn\n"
      "\n"
      "1.0 -12.5 1\n");
  EXPECT_EQ(t.mode(), Interpolation::Step);
  ASSERT_EQ(t.keys().size(), 3u);
  EXPECT_DOUBLE_EQ(t.keys()[1].handlebar_deg, 90.0);
  EXPECT_DOUBLE_EQ(t.keys()[2].handlebar_deg, -12.5);

  const auto again = parse_trace(format_trace(t));
  EXPECT_EQ(again.mode(), t.mode());
  ASSERT_EQ(again.keys().size(), t.keys().size());
  for (std::size_t i = 0; i < t.keys().size(); ++i) {
    EXPECT_EQ(again.keys()[i].time_s, t.keys()[i].time_s);
    EXPECT_EQ(again.keys()[i].belt_speed_mps, t.keys()[i].belt_speed_mps);
  }
}

TEST(TraceFile, FormatIsRoundTripExact) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-100, 100);
  InputTrace t({}, Interpolation::Linear);
  double time = 0.0;
  for (int i = 0; i < 100; ++i) {
    time += 0.001 + std::abs(u(rng)) / 77.0;
    t.append({time, u(rng), u(rng) / 3.0});
  }
  const auto back = parse_trace(format_trace(t));
  ASSERT_EQ(back.keys().size(), t.keys().size());
  for (std::size_t i = 0; i < t.keys().size(); ++i) {
    EXPECT_EQ(back.keys()[i].time_s, t.keys()[i].time_s);
    EXPECT_EQ(back.keys()[i].handlebar_deg, t.keys()[i].handlebar_deg);
    EXPECT_EQ(back.keys()[i].belt_speed_mps, t.keys()[i].belt_speed_mps);
  }
}

TEST(TraceFile, Errors) {
  EXPECT_EQ(kind_of([] { parse_trace("mode: cubic\n0 0 0\n"); }), ErrorKind::Parse);
  EXPECT_EQ(kind_of([] { parse_trace("0 0\n"); }), ErrorKind::Parse);
  EXPECT_EQ(kind_of([] { parse_trace("0 0 x\n"); }), ErrorKind::Parse);
  EXPECT_EQ(kind_of([] { parse_trace("# nothing\n"); }), ErrorKind::InvalidTrace);
  EXPECT_EQ(kind_of([] { parse_trace("1 0 0\n1 0 0\n"); }), ErrorKind::InvalidTrace);
  EXPECT_EQ(kind_of([] { load_trace("/nonexistent/trace.txt"); }), ErrorKind::FileNotFound);
}

TEST(Calibration, Validation) {
  DeviceCalibration c;
  c.counts_per_meter = 0;
  EXPECT_EQ(kind_of([&] { c.validate(); }), ErrorKind::InvalidField);
  c = {};
  c.sample_rate_hz = -1;
  EXPECT_EQ(kind_of([&] { c.validate(); }), ErrorKind::InvalidField);
  c = {};
  c.center_raw = 16384;
  EXPECT_EQ(kind_of([&] { c.validate(); }), ErrorKind::InvalidField);
}

TEST(FrameEmitter, ProducesConsecutiveFramesOnAQueue) {
  MessageQueue<EncoderFrame> queue;
  {
    FrameEmitter emitter({}, [](double t, FrameEmitter::Command& c) {
      c.handlebar_deg = 45.0;
      c.belt_speed_mps = 1.0;
      return t < 0.1 - 1e-9;
    }, queue);
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(5);
    while (emitter.running() && std::chrono::steady_clock::now() < deadline)
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  const auto frames = queue.drain();
  ASSERT_EQ(frames.size(), 10u);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    EXPECT_EQ(frames[i].seq, i);
    EXPECT_EQ(frames[i].handlebar_raw, 10240);
    EXPECT_EQ(frames[i].treadmill_delta, 20);
  }
}
