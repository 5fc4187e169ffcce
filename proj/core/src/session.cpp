#include <algorithm>
#include <cmath>
#include <random>

#include "loco/error.hpp"
#include "loco/task_engine.hpp"

namespace loco {

namespace {
constexpr std::int64_t kNanos = 1'000'000'000;
constexpr std::int64_t kDwellRequiredNs = 2 * kNanos;
constexpr std::int64_t kSamplePeriodNs = kNanos / 10;

std::int64_t to_ns(double seconds) { return std::llround(seconds * 1e9); }
double to_s(std::int64_t ns) { return static_cast<double>(ns) * 1e-9; }
}  // namespace

std::string_view to_string(Condition c) noexcept {
  return c == Condition::Scooter ? "scooter" : "joystick";
}

Condition parse_condition(std::string_view text) {
  if (text == "scooter") return Condition::Scooter;
  if (text == "joystick") return Condition::Joystick;
  throw Error(ErrorKind::Parse, "condition must be scooter|joystick, got '" + std::string(text) + "'");
}

InputSource input_source_for(Condition c) noexcept {
  return c == Condition::Scooter ? InputSource::Scooter : InputSource::Joystick;
}

std::string_view to_string(TrialPhase p) noexcept {
  switch (p) {
    case TrialPhase::Prompt: return "prompt";
    case TrialPhase::Navigating: return "navigating";
    case TrialPhase::Dwelling: return "dwelling";
    case TrialPhase::Complete: return "complete";
  }
  return "unknown";
}

std::string_view event_kind(const SessionEvent& e) noexcept {
  struct Visitor {
    std::string_view operator()(const event::TrialStarted&) const { return "trial_started"; }
    std::string_view operator()(const event::DwellStarted&) const { return "dwell_started"; }
    std::string_view operator()(const event::DwellReset&) const { return "dwell_reset"; }
    std::string_view operator()(const event::TrialComplete& t) const {
      return t.log.aborted ? "trial_aborted" : "trial_complete";
    }
    std::string_view operator()(const event::Teleport&) const { return "teleport"; }
    std::string_view operator()(const event::SessionComplete&) const { return "session_complete"; }
    std::string_view operator()(const event::Warning&) const { return "warning"; }
  };
  return std::visit(Visitor{}, e);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) noexcept {
  // splitmix64 finalizer over a simple combination.
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (a + 1) + 0xBF58476D1CE4E5B9ull * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

namespace {

// Uniform integer in [0, bound) by rejection; mt19937_64 output is fully
// specified by the standard, the distributions are not.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return r % bound;
}

}  // namespace

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(out[i - 1], out[bounded(rng, i)]);
  return out;
}

std::vector<std::array<Condition, 2>> counterbalanced_orders(std::size_t n, std::uint64_t seed) {
  std::vector<std::array<Condition, 2>> orders;
  orders.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i % 2 == 0) orders.push_back({Condition::Scooter, Condition::Joystick});
    else orders.push_back({Condition::Joystick, Condition::Scooter});
  }
  const auto perm = seeded_permutation(n, mix_seed(seed, 0xC0));
  std::vector<std::array<Condition, 2>> shuffled(n);
  for (std::size_t i = 0; i < n; ++i) shuffled[i] = orders[perm[i]];
  return shuffled;
}

Session::Session(const CityMap& map, std::string participant_id, Condition condition,
                 std::uint64_t seed, SessionOptions options)
    : participant_(std::move(participant_id)),
      condition_(condition),
      seed_(seed),
      options_(options),
      start_(map.start) {
  if (!options_.fixed_order.empty()) {
    for (const auto& id : options_.fixed_order) {
      goals_.push_back(map.goal(id));
      order_.push_back(id);
    }
    options_.trials = static_cast<int>(order_.size());
    return;
  }
  if (options_.trials <= 0 || static_cast<std::size_t>(options_.trials) > map.goals.size())
    throw Error(ErrorKind::Validation, "session needs " + std::to_string(options_.trials) +
                                           " trials but the map has " +
                                           std::to_string(map.goals.size()) + " goals");
  const auto perm = seeded_permutation(map.goals.size(), seed);
  for (int i = 0; i < options_.trials; ++i) {
    goals_.push_back(map.goals[perm[static_cast<std::size_t>(i)]]);
    order_.push_back(goals_.back().id);
  }
}

Session make_session(const CityMap& map, const std::string& participant_id, Condition condition,
                     std::uint64_t seed, SessionOptions options) {
  return Session(map, participant_id, condition, seed, options);
}

const GoalZone* Session::active_goal() const noexcept {
  if (finished_ || current_ >= goals_.size()) return nullptr;
  return &goals_[current_];
}

void Session::record_sample(const AvatarState& a) {
  trace_.push_back({to_s(clock_ns_), a.position.x, a.position.y, a.heading});
}

TrialLog Session::close_trial(bool aborted) {
  TrialLog log;
  log.participant_id = participant_;
  log.condition = condition_;
  log.goal_id = goals_[current_].id;
  log.trial_index = static_cast<int>(current_);
  log.start_time_s = to_s(trial_start_ns_);
  log.end_time_s = to_s(clock_ns_);
  log.completion_time_s = to_s(clock_ns_ - trial_start_ns_);
  log.aborted = aborted;
  log.trace = std::move(trace_);
  trace_.clear();
  logs_.push_back(log);
  return log;
}

std::vector<SessionEvent> Session::tick(const AvatarState& avatar, double dt) {
  std::vector<SessionEvent> events;
  if (finished_) {
    events.push_back(event::Warning{"tick after session complete ignored"});
    return events;
  }
  const std::int64_t dt_ns = to_ns(dt);

  if (phase_ == TrialPhase::Prompt) {
    const auto& g = goals_[current_];
    trial_start_ns_ = clock_ns_;
    trial_ticks_ = 0;
    dwell_ns_ = 0;
    phase_ = TrialPhase::Navigating;
    trace_.clear();
    record_sample(avatar);
    next_sample_ns_ = clock_ns_ + kSamplePeriodNs;
    events.push_back(event::TrialStarted{static_cast<int>(current_), g.id, g.display_name,
                                         "Please go to '" + g.display_name + "'",
                                         to_s(clock_ns_)});
  }

  clock_ns_ += dt_ns;
  ++trial_ticks_;
  if (clock_ns_ >= next_sample_ns_) {
    record_sample(avatar);
    next_sample_ns_ += kSamplePeriodNs;
  }

  const auto& goal = goals_[current_];
  const bool qualifying =
      goal.contains(avatar.position) && std::abs(avatar.v) < options_.stationary_eps;
  if (qualifying) {
    if (phase_ == TrialPhase::Navigating) {
      phase_ = TrialPhase::Dwelling;
      dwell_ns_ = dt_ns;
      events.push_back(event::DwellStarted{to_s(clock_ns_)});
    } else {
      dwell_ns_ += dt_ns;
    }
    if (dwell_ns_ >= kDwellRequiredNs) {
      phase_ = TrialPhase::Complete;
      events.push_back(event::TrialComplete{close_trial(false)});
      events.push_back(event::Teleport{start_});
      ++current_;
      dwell_ns_ = 0;
      if (current_ == goals_.size()) {
        finished_ = true;
        events.push_back(event::SessionComplete{to_s(clock_ns_)});
      } else {
        phase_ = TrialPhase::Prompt;
      }
    }
  } else if (phase_ == TrialPhase::Dwelling) {
    events.push_back(event::DwellReset{to_s(dwell_ns_)});
    phase_ = TrialPhase::Navigating;
    dwell_ns_ = 0;
  }
  return events;
}

std::vector<SessionEvent> Session::abort(const AvatarState& avatar) {
  std::vector<SessionEvent> events;
  if (finished_) {
    events.push_back(event::Warning{"abort after session complete ignored"});
    return events;
  }
  if (phase_ == TrialPhase::Prompt) trial_start_ns_ = clock_ns_;
  record_sample(avatar);
  events.push_back(event::TrialComplete{close_trial(true)});
  finished_ = true;
  dwell_ns_ = 0;
  events.push_back(event::SessionComplete{to_s(clock_ns_)});
  return events;
}

}  // namespace loco
