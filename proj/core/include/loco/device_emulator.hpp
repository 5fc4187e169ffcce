#pragma once

// Software stand-in for the scooter hardware: a 14-bit absolute encoder on
// the handlebar and a relative encoder on the treadmill belt, sampled at a
// fixed rate.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "loco/message_queue.hpp"
#include "loco/wire_protocol.hpp"

namespace loco {

inline constexpr std::uint32_t kEncoderCountsPerTurn = 16384;

struct DeviceCalibration {
  std::uint16_t center_raw = 8192;
  double counts_per_meter = 2000.0;
  double sample_rate_hz = 100.0;

  double frame_period_s() const noexcept { return 1.0 / sample_rate_hz; }
  /// Throws Error(InvalidField) when an invariant is violated.
  void validate() const;
};

std::uint16_t quantize_handlebar(double angle_deg, const DeviceCalibration& calib);

struct CountStep {
  std::int16_t delta = 0;
  double accumulator = 0.0;
};

/// Adds belt_speed * dt * counts_per_meter to the fractional accumulator and
/// emits its integer part (truncated toward zero); the fraction carries.
CountStep belt_to_counts(double belt_speed_mps, double dt, double accumulator,
                         const DeviceCalibration& calib);

enum class Interpolation { Step, Linear };

struct TraceKey {
  double time_s = 0.0;
  double handlebar_deg = 0.0;
  double belt_speed_mps = 0.0;
};

class InputTrace {
 public:
  InputTrace() = default;
  InputTrace(std::vector<TraceKey> keys, Interpolation mode);

  /// Appends a keyframe strictly after the current last one.
  void append(const TraceKey& key);

  const std::vector<TraceKey>& keys() const noexcept { return keys_; }
  Interpolation mode() const noexcept { return mode_; }
  bool empty() const noexcept { return keys_.empty(); }
  double end_time() const noexcept { return keys_.empty() ? 0.0 : keys_.back().time_s; }

  double handlebar_at(double t) const;
  double belt_speed_at(double t) const;
  /// Exact integral of belt speed over [t0, t1]; the first and last values
  /// extend as constants outside the keyframe range.
  double belt_travel(double t0, double t1) const;

  /// Throws Error(InvalidTrace) on an empty trace, non-increasing times or
  /// non-finite values.
  void validate() const;

 private:
  std::vector<TraceKey> keys_;
  Interpolation mode_ = Interpolation::Linear;
};

InputTrace parse_trace(std::string_view text);
InputTrace load_trace(const std::filesystem::path& path);
/// Round-trip exact text form (17 significant digits).
std::string format_trace(const InputTrace& trace);
void save_trace(const InputTrace& trace, const std::filesystem::path& path);

/// Stateful encoder pair. Frame k is stamped at t_k = k / sample_rate; its
/// handlebar value is sampled at t_k and its treadmill delta covers
/// [t_k, t_{k+1}).
class DeviceEmulator {
 public:
  explicit DeviceEmulator(DeviceCalibration calib = {});

  EncoderFrame emit(double handlebar_deg, double belt_travel_m);
  EncoderFrame emit_from(const InputTrace& trace);

  double frame_time(std::uint64_t index) const noexcept {
    return static_cast<double>(index) / calib_.sample_rate_hz;
  }
  std::uint64_t frames_emitted() const noexcept { return emitted_; }
  double next_frame_time() const noexcept { return frame_time(emitted_); }
  double accumulator() const noexcept { return accumulator_; }
  const DeviceCalibration& calibration() const noexcept { return calib_; }

 private:
  DeviceCalibration calib_;
  std::uint64_t emitted_ = 0;
  double accumulator_ = 0.0;
};

/// Emits one frame per sample period while t_k < trace.end_time().
std::vector<EncoderFrame> run_trace(const InputTrace& trace, const DeviceCalibration& calib);

/// Real-time producer: a dedicated thread emits a frame every sample period
/// and pushes it to the output queue. The command callback is invoked on the
/// producer thread and returns (handlebar_deg, belt_speed_mps) for the frame
/// interval; returning false ends the stream.
class FrameEmitter {
 public:
  struct Command {
    double handlebar_deg = 0.0;
    double belt_speed_mps = 0.0;
  };
  using Source = std::function<bool(double t, Command& out)>;

  FrameEmitter(DeviceCalibration calib, Source source, MessageQueue<EncoderFrame>& out);
  ~FrameEmitter();
  FrameEmitter(const FrameEmitter&) = delete;
  FrameEmitter& operator=(const FrameEmitter&) = delete;

  void stop();
  bool running() const noexcept { return running_.load(); }

 private:
  void run();

  DeviceCalibration calib_;
  Source source_;
  MessageQueue<EncoderFrame>& out_;
  std::atomic<bool> running_{true};
  std::jthread thread_;
};

}  // namespace loco
