#include "loco/error.hpp"
#include "loco/host_service.hpp"

namespace loco {

std::string_view to_string(RunState s) noexcept {
  switch (s) {
    case RunState::Idle: return "idle";
    case RunState::Running: return "running";
    case RunState::Paused: return "paused";
    case RunState::Finished: return "finished";
    case RunState::Aborted: return "aborted";
  }
  return "?";
}

SessionController::SessionController(std::shared_ptr<const CityMap> map, ControlConfig control,
                                     SessionConfig config)
    : map_(std::move(map)), control_(std::move(control)), config_(std::move(config)) {
  config_.validate();
  if (const auto* t = std::get_if<TraceInput>(&config_.input)) {
    trace_ = load_trace(t->path);
    trace_->validate();
  }
  rebuild();
}

void SessionController::rebuild() {
  Session session(*map_, config_.participant_id, config_.condition, config_.seed);
  pipeline_ = std::make_unique<Pipeline>(map_, control_, std::move(session));
  reader_ = std::make_unique<ScooterFrameReader>(control_);
  trace_link_ = std::make_unique<DeviceLink>(control_, config_.condition);
  pending_frames_.clear();
  injected_.reset();
}

CommandReply SessionController::reject(const Command& cmd, std::string message) const {
  CommandReply r;
  r.ok = false;
  r.error = "invalid-state";
  r.message = std::move(message) + " (state: " + std::string(to_string(state_)) + ")";
  r.id = cmd.id;
  return r;
}

CommandReply SessionController::handle_command(const Command& cmd) {
  CommandReply ok;
  ok.id = cmd.id;
  const auto& c = cmd.cmd;
  if (c == "start") {
    if (state_ != RunState::Idle) return reject(cmd, "start requires idle");
    state_ = RunState::Running;
    return ok;
  }
  if (c == "pause") {
    if (state_ != RunState::Running) return reject(cmd, "pause requires running");
    state_ = RunState::Paused;
    return ok;
  }
  if (c == "resume") {
    if (state_ != RunState::Paused) return reject(cmd, "resume requires paused");
    state_ = RunState::Running;
    return ok;
  }
  if (c == "abort") {
    if (done()) return reject(cmd, "session already ended");
    auto events = pipeline_->abort();
    record(events);
    extra_events_.insert(extra_events_.end(), events.begin(), events.end());
    state_ = RunState::Aborted;
    return ok;
  }
  if (c == "inject_input") {
    if (!std::holds_alternative<ClientInput>(config_.input))
      return reject(cmd, "inject_input requires the client input source, configured source is " +
                             std::string(input_kind(config_.input)));
    if (done()) return reject(cmd, "session already ended");
    injected_ = NormalizedInput::make(cmd.yaw, cmd.slide, input_source_for(config_.condition),
                                      pipeline_->clock());
    return ok;
  }
  if (c == "set_condition") {
    if (state_ != RunState::Idle) return reject(cmd, "set_condition is only allowed before start");
    if (!cmd.condition) {
      CommandReply r;
      r.ok = false;
      r.error = "invalid-command";
      r.message = "set_condition needs a condition";
      r.id = cmd.id;
      return r;
    }
    config_.condition = *cmd.condition;
    rebuild();
    return ok;
  }
  CommandReply r;
  r.ok = false;
  r.error = "invalid-command";
  r.message = "unknown command '" + c + "'";
  r.id = cmd.id;
  return r;
}

void SessionController::feed_frames(std::span<const EncoderFrame> frames) {
  if (!std::holds_alternative<UdpInput>(config_.input)) return;
  pending_frames_.insert(pending_frames_.end(), frames.begin(), frames.end());
}

std::uint64_t SessionController::frames_rejected() const noexcept {
  return reader_ ? reader_->rejected_stale() : 0;
}

std::optional<TickResult> SessionController::tick(double dt) {
  if (state_ != RunState::Running) {
    // Datagrams that arrive while paused are not replayed on resume.
    pending_frames_.clear();
    return std::nullopt;
  }
  const double t = pipeline_->clock();
  std::optional<NormalizedInput> input;
  switch (config_.input.index()) {
    case 0:
      if (config_.condition == Condition::Scooter) {
        input = reader_->consume(pending_frames_, t);
      } else if (!pending_frames_.empty()) {
        // A joystick session fed by UDP maps the last frame onto the sticks.
        const auto& f = pending_frames_.back();
        const double deg = handlebar_angle_deg(f.handlebar_raw, control_.device);
        const double belt = static_cast<double>(f.treadmill_delta) /
                            control_.device.counts_per_meter / control_.device.frame_period_s();
        input = joystick_to_input(belt / control_.max_slide_speed, deg / 90.0, t).input;
      }
      pending_frames_.clear();
      break;
    case 1:
      if (!trace_link_->exhausted(*trace_)) input = trace_link_->next(*trace_, t);
      break;
    default:
      input = injected_;
      injected_.reset();
      break;
  }
  auto result = pipeline_->tick(input, dt);
  record(result.events);
  if (pipeline_->session().finished()) state_ = RunState::Finished;
  return result;
}

void SessionController::record(const std::vector<SessionEvent>& events) {
  for (const auto& e : events)
    if (const auto* tc = std::get_if<event::TrialComplete>(&e)) logs_.push_back(tc->log);
}

std::vector<SessionEvent> SessionController::take_events() { return std::exchange(extra_events_, {}); }

}  // namespace loco
