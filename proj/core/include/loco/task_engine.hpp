#pragma once

// Navigation-trial harness: city map, per-condition trial sessions with the
// dwell-to-complete rule, counterbalanced cohorts and a scripted pilot.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "loco/input_mapping.hpp"
#include "loco/locomotion_sim.hpp"

namespace loco {

inline constexpr double kDwellRequiredSeconds = 2.0;
inline constexpr double kDefaultGoalRadius = 2.0;
inline constexpr double kDefaultStationaryEps = 0.05;
inline constexpr int kTrialsPerCondition = 6;
inline constexpr double kTraceSampleHz = 10.0;

enum class Condition { Scooter, Joystick };

std::string_view to_string(Condition c) noexcept;
/// Accepts "scooter" / "joystick"; throws Error(Parse) otherwise.
Condition parse_condition(std::string_view text);
InputSource input_source_for(Condition c) noexcept;

struct GoalZone {
  std::string id;
  std::string display_name;
  Vec2 center;
  double radius = kDefaultGoalRadius;
  double dwell_required = kDwellRequiredSeconds;

  bool contains(Vec2 p) const noexcept { return distance(p, center) <= radius; }
};

struct CityMap {
  Pose start;
  std::vector<GoalZone> goals;
  std::vector<Segment> walls;
  std::map<std::string, std::vector<Vec2>> guidance;
  std::map<std::string, double> guidance_length_m;

  const GoalZone& goal(std::string_view id) const;
  const std::vector<Vec2>& path_to(std::string_view id) const;
};

double polyline_length(std::span<const Vec2> path) noexcept;

/// Parses the JSON map document and validates it; throws Error(Parse) for
/// malformed JSON and Error(Validation) naming the offending goal.
CityMap parse_map(std::string_view document);
CityMap load_map(const std::filesystem::path& path);
/// Validates invariants and fills guidance_length_m.
void validate_map(CityMap& map);
std::string map_to_json(const CityMap& map);

/// Synthesized grid city: 100 m blocks, 20 m streets, six destinations whose
/// guidance routes run 360-480 m along street centerlines.
CityMap default_city_map();

struct TraceSample {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;

  friend bool operator==(const TraceSample&, const TraceSample&) = default;
};

struct TrialLog {
  std::string participant_id;
  Condition condition = Condition::Scooter;
  std::string goal_id;
  int trial_index = 0;
  double start_time_s = 0.0;
  double end_time_s = 0.0;
  double completion_time_s = 0.0;
  bool aborted = false;
  std::vector<TraceSample> trace;

  friend bool operator==(const TrialLog&, const TrialLog&) = default;
};

std::string trial_log_to_json(const TrialLog& log);
TrialLog trial_log_from_json(std::string_view line);

/// Writes `trial_logs.jsonl` (one record per line) and `summary.csv` into dir.
void write_trial_logs(const std::filesystem::path& dir, std::span<const TrialLog> logs);
/// Reads every *.jsonl file under dir (or a single file) in path order.
std::vector<TrialLog> read_trial_logs(const std::filesystem::path& path);
std::string summary_csv(std::span<const TrialLog> logs);

enum class TrialPhase { Prompt, Navigating, Dwelling, Complete };
std::string_view to_string(TrialPhase p) noexcept;

namespace event {
struct TrialStarted {
  int trial_index = 0;
  std::string goal_id;
  std::string goal_name;
  std::string prompt;
  double time_s = 0.0;
};
struct DwellStarted {
  double time_s = 0.0;
};
struct DwellReset {
  double elapsed_s = 0.0;
};
struct TrialComplete {
  TrialLog log;
};
struct Teleport {
  Pose pose;
};
struct SessionComplete {
  double time_s = 0.0;
};
struct Warning {
  std::string message;
};
}  // namespace event

using SessionEvent = std::variant<event::TrialStarted, event::DwellStarted, event::DwellReset,
                                  event::TrialComplete, event::Teleport, event::SessionComplete,
                                  event::Warning>;

std::string_view event_kind(const SessionEvent& e) noexcept;

struct SessionOptions {
  int trials = kTrialsPerCondition;
  double stationary_eps = kDefaultStationaryEps;
  /// Replaces the seeded order with these goal ids (trials = its size).
  std::vector<std::string> fixed_order;
};

/// Deterministic Fisher-Yates driven by mt19937_64 with explicit rejection
/// sampling, so the order is identical across standard libraries.
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) noexcept;

class Session {
 public:
  Session(const CityMap& map, std::string participant_id, Condition condition,
          std::uint64_t seed, SessionOptions options = {});

  /// Advances the trial state machine by dt using the avatar state after
  /// this tick's motion update.
  std::vector<SessionEvent> tick(const AvatarState& avatar, double dt);

  /// Closes the active trial as an aborted log and ends the session.
  std::vector<SessionEvent> abort(const AvatarState& avatar);

  const std::string& participant_id() const noexcept { return participant_; }
  Condition condition() const noexcept { return condition_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const std::vector<std::string>& trial_order() const noexcept { return order_; }
  std::size_t current_trial() const noexcept { return current_; }
  std::size_t trial_count() const noexcept { return order_.size(); }
  TrialPhase phase() const noexcept { return phase_; }
  double dwell_elapsed() const noexcept { return dwell_ns_ * 1e-9; }
  double clock() const noexcept { return clock_ns_ * 1e-9; }
  bool finished() const noexcept { return finished_; }
  const GoalZone* active_goal() const noexcept;
  const Pose& start_pose() const noexcept { return start_; }
  const std::vector<TrialLog>& logs() const noexcept { return logs_; }

 private:
  void record_sample(const AvatarState& avatar);
  TrialLog close_trial(bool aborted);

  std::string participant_;
  Condition condition_;
  std::uint64_t seed_;
  SessionOptions options_;
  Pose start_;
  std::vector<GoalZone> goals_;     // in trial order
  std::vector<std::string> order_;  // goal ids in trial order
  std::size_t current_ = 0;
  TrialPhase phase_ = TrialPhase::Prompt;
  std::int64_t clock_ns_ = 0;
  std::int64_t trial_start_ns_ = 0;
  std::int64_t dwell_ns_ = 0;
  std::int64_t trial_ticks_ = 0;
  std::int64_t next_sample_ns_ = 0;
  bool finished_ = false;
  std::vector<TraceSample> trace_;
  std::vector<TrialLog> logs_;
};

Session make_session(const CityMap& map, const std::string& participant_id, Condition condition,
                     std::uint64_t seed, SessionOptions options = {});

/// Condition order per participant; exactly floor(n/2) or ceil(n/2)
/// participants start with each condition, shuffled by seed.
std::vector<std::array<Condition, 2>> counterbalanced_orders(std::size_t n, std::uint64_t seed);

struct PilotConfig {
  double lookahead_m = 8.0;
  double braking_decel = 3.0;  // m/s^2 used to plan the stop at the goal
  double speed_scale = 1.0;    // caps slide at this fraction of full speed
};

/// Farthest point of the polyline (by arc length) within `lookahead` of p;
/// the nearest path point when none lies within the circle.
Vec2 lookahead_point(std::span<const Vec2> path, Vec2 p, double lookahead) noexcept;

/// Pure-pursuit stand-in for a participant. Yaw is the signed heading error
/// to the lookahead point over 90 degrees; slide is 1 below 45 degrees of
/// error, falling linearly to 0.2 at 180 degrees, capped so the avatar can
/// stop at the goal center, and 0 once inside the goal zone.
NormalizedInput scripted_pilot(const AvatarState& avatar, std::span<const Vec2> path,
                               const GoalZone& goal, const MotionParams& params,
                               const PilotConfig& pilot, InputSource source, double time_s = 0.0);

}  // namespace loco
