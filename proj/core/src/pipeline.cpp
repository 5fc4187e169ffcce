#include "loco/pipeline.hpp"

#include <cmath>

namespace loco {

std::optional<NormalizedInput> ScooterFrameReader::consume(std::span<const EncoderFrame> frames,
                                                           double time_s) {
  std::optional<EncoderFrame> latest;
  double slide_sum = 0.0;
  int count = 0;
  for (const auto& f : frames) {
    if (last_seq_ && !seq_newer(f.seq, *last_seq_)) {
      ++stale_;
      continue;
    }
    last_seq_ = f.seq;
    ++accepted_;
    latest = f;
    slide_sum += counts_to_slide(f.treadmill_delta, config_.device.frame_period_s(), config_.device,
                                 config_.max_slide_speed);
    ++count;
  }
  if (!latest) return std::nullopt;
  double yaw = 0.0;
  if (latest->absolute_valid()) yaw = handlebar_to_yaw(latest->handlebar_raw, config_.device);
  return NormalizedInput::make(yaw, slide_sum / count, InputSource::Scooter, time_s);
}

bool LossyLink::deliver() {
  if (drop_ <= 0.0) return true;
  const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  return u >= drop_;
}

Pipeline::Pipeline(std::shared_ptr<const CityMap> map, ControlConfig config, Session session,
                   double avatar_radius)
    : map_(std::move(map)),
      config_(std::move(config)),
      session_(std::move(session)),
      radius_(avatar_radius) {
  config_.validate();
  avatar_ = teleport(AvatarState{}, session_.start_pose());
  reference_heading_ = avatar_.heading;
  last_input_.source = input_source_for(session_.condition());
}

TickResult Pipeline::tick(std::optional<NormalizedInput> fresh, double dt) {
  const auto dt_ns = std::llround(dt * 1e9);
  if (fresh) {
    last_input_ = *fresh;
    last_input_ns_ = clock_ns_;
  }
  NormalizedInput input = last_input_;
  stale_ = !last_input_ns_ ||
           static_cast<double>(clock_ns_ - *last_input_ns_) * 1e-9 > kInputStaleSeconds;
  if (stale_) {
    input.yaw_input = 0.0;
    input.slide_input = 0.0;
  }

  const auto& motion = config_.motion;
  const auto target = target_velocities(input, motion);
  const double w_target = motion.yaw_mode == YawMode::RateControl
                              ? target.angular
                              : direct_heading_rate(input.yaw_input, avatar_.heading,
                                                    reference_heading_, motion, dt);
  avatar_.v = clamp_step(avatar_.v, target.linear, motion.linear_accel_limit, dt);
  avatar_.w = clamp_step(avatar_.w, w_target, motion.angular_accel_limit, dt);
  avatar_ = integrate_pose(avatar_, dt);
  avatar_ = resolve_collision(avatar_, map_->walls, radius_);

  TickResult result;
  result.events = session_.tick(avatar_, dt);
  for (const auto& e : result.events) {
    if (const auto* tp = std::get_if<event::Teleport>(&e)) {
      avatar_ = teleport(avatar_, tp->pose);
      reference_heading_ = avatar_.heading;
    }
  }
  clock_ns_ += dt_ns;
  result.snapshot = snapshot();
  result.snapshot.input = input;
  return result;
}

std::vector<SessionEvent> Pipeline::abort() { return session_.abort(avatar_); }

StateSnapshot Pipeline::snapshot() const {
  StateSnapshot s;
  s.wall_time_s = clock();
  s.avatar = avatar_;
  s.input = last_input_;
  s.input_stale = stale_;
  if (const auto* g = session_.active_goal()) {
    s.goal_id = g->id;
    s.goal_name = g->display_name;
  }
  s.phase = session_.phase();
  s.dwell_elapsed_s = session_.dwell_elapsed();
  s.trial_total = session_.trial_count();
  s.trial_index = session_.finished() ? session_.trial_count() : session_.current_trial() + 1;
  s.session_complete = session_.finished();
  return s;
}

}  // namespace loco
