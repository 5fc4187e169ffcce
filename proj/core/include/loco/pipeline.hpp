#pragma once

// One authoritative tick of the host loop:
//   input -> target velocities -> acceleration clamp -> integrate ->
//   collision -> trial state machine -> snapshot

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "loco/input_mapping.hpp"
#include "loco/locomotion_sim.hpp"
#include "loco/task_engine.hpp"
#include "loco/wire_protocol.hpp"

namespace loco {

inline constexpr double kInputStaleSeconds = 0.2;

struct StateSnapshot {
  double wall_time_s = 0.0;
  AvatarState avatar;
  NormalizedInput input;
  bool input_stale = false;
  std::string goal_id;
  std::string goal_name;
  TrialPhase phase = TrialPhase::Prompt;
  double dwell_elapsed_s = 0.0;
  std::size_t trial_index = 0;  // 1-based for display, 0 before the first trial
  std::size_t trial_total = 0;
  bool session_complete = false;
};

struct TickResult {
  std::vector<SessionEvent> events;
  StateSnapshot snapshot;
};

/// Turns decoded device frames into normalized input. Frames that are not
/// newer than the last accepted sequence number are dropped; several frames
/// arriving within one tick are merged (latest handlebar, mean belt speed).
class ScooterFrameReader {
 public:
  explicit ScooterFrameReader(ControlConfig config) : config_(std::move(config)) {}

  std::optional<NormalizedInput> consume(std::span<const EncoderFrame> frames, double time_s);

  std::uint64_t accepted() const noexcept { return accepted_; }
  std::uint64_t rejected_stale() const noexcept { return stale_; }

 private:
  ControlConfig config_;
  std::optional<std::uint32_t> last_seq_;
  std::uint64_t accepted_ = 0;
  std::uint64_t stale_ = 0;
};

/// Seeded Bernoulli drop used to inject datagram loss.
class LossyLink {
 public:
  LossyLink(double drop_probability, std::uint64_t seed) : drop_(drop_probability), rng_(seed) {}
  bool deliver();

 private:
  double drop_;
  std::mt19937_64 rng_;
};

class Pipeline {
 public:
  Pipeline(std::shared_ptr<const CityMap> map, ControlConfig config, Session session,
           double avatar_radius = kDefaultAvatarRadius);

  /// `fresh` is the input that arrived this tick, if any. Without fresh
  /// input the last one is held until it is older than 200 ms, after which
  /// both channels read 0.
  TickResult tick(std::optional<NormalizedInput> fresh, double dt);

  /// Closes the session, flagging the active trial as aborted.
  std::vector<SessionEvent> abort();

  const AvatarState& avatar() const noexcept { return avatar_; }
  const Session& session() const noexcept { return session_; }
  const CityMap& map() const noexcept { return *map_; }
  const ControlConfig& config() const noexcept { return config_; }
  double clock() const noexcept { return static_cast<double>(clock_ns_) * 1e-9; }
  StateSnapshot snapshot() const;

 private:
  std::shared_ptr<const CityMap> map_;
  ControlConfig config_;
  Session session_;
  double radius_;
  AvatarState avatar_;
  double reference_heading_ = 0.0;
  NormalizedInput last_input_;
  std::optional<std::int64_t> last_input_ns_;
  bool stale_ = true;
  std::int64_t clock_ns_ = 0;
};

}  // namespace loco
