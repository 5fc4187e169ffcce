#pragma once

// Fast-forward (non-real-time) session runs: trace replay, closed-loop
// scripted pilot, and synthetic counterbalanced cohorts.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "loco/device_emulator.hpp"
#include "loco/pipeline.hpp"

namespace loco {

struct RunOptions {
  std::string participant_id = "P01";
  Condition condition = Condition::Scooter;
  std::uint64_t seed = 1;
  double drop_probability = 0.0;  // uniform datagram loss on the device link
  std::uint64_t drop_seed = 0;
  double max_duration_s = 1800.0;
  SessionOptions session;
};

struct LinkStats {
  std::uint64_t frames_sent = 0;
  std::uint64_t frames_dropped = 0;
  std::uint64_t decode_errors = 0;
};

/// Turns a device trace into pipeline input one frame interval at a time.
/// Scooter: every frame goes through the emulator, the 20-byte wire codec
/// and the (optionally lossy) link. Joystick: the trace's handlebar angle /
/// 90 and belt speed / max_slide_speed are the right-X and left-Y axes.
class DeviceLink {
 public:
  DeviceLink(ControlConfig config, Condition condition, double drop_probability = 0.0,
             std::uint64_t drop_seed = 0);

  bool exhausted(const InputTrace& trace) const;
  double frame_time() const { return emulator_.next_frame_time(); }
  std::optional<NormalizedInput> next(const InputTrace& trace, double time_s);
  const LinkStats& stats() const { return stats_; }

 private:
  ControlConfig config_;
  Condition condition_;
  DeviceEmulator emulator_;
  ScooterFrameReader reader_;
  LossyLink link_;
  LinkStats stats_;
};

struct RunResult {
  std::vector<TrialLog> logs;
  bool completed = false;
  std::uint64_t ticks = 0;
  double sim_time_s = 0.0;
  LinkStats link;
  InputTrace trace;  // the device-level trace that drove the run
};

/// Replays a device trace through a DeviceLink. Ends at session completion
/// or trace end.
RunResult run_trace_session(const CityMap& map, const ControlConfig& config,
                            const InputTrace& trace, const RunOptions& options);

inline constexpr double kPilotTraceTailSeconds = 3.0;

/// Closed-loop scripted pilot through the same input path as
/// run_trace_session; the commands are recorded as a step trace that
/// reproduces the run exactly when replayed.
RunResult run_pilot_session(const CityMap& map, const ControlConfig& config,
                            const RunOptions& options, const PilotConfig& pilot = {});

struct CohortResult {
  std::vector<TrialLog> logs;
  std::vector<std::string> participants;
  std::vector<std::array<Condition, 2>> orders;
};

/// n synthetic participants, counterbalanced condition order, six pilot
/// trials per condition. Each participant gets a seeded pilot speed cap and
/// lookahead so the per-participant sums vary.
CohortResult simulate_cohort(const CityMap& map, const ControlConfig& config, std::size_t n,
                             std::uint64_t seed);

}  // namespace loco
