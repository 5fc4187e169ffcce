#include "loco/headless.hpp"

#include <cmath>
#include <cstdio>
#include <memory>

#include "loco/error.hpp"

namespace loco {

DeviceLink::DeviceLink(ControlConfig config, Condition condition, double drop_probability,
                       std::uint64_t drop_seed)
    : config_(std::move(config)),
      condition_(condition),
      emulator_(config_.device),
      reader_(config_),
      link_(drop_probability, drop_seed) {}

bool DeviceLink::exhausted(const InputTrace& trace) const {
  return !(emulator_.next_frame_time() < trace.end_time());
}

std::optional<NormalizedInput> DeviceLink::next(const InputTrace& trace, double time_s) {
  if (condition_ == Condition::Joystick) {
    const double t0 = emulator_.next_frame_time();
    const double t1 = emulator_.frame_time(emulator_.frames_emitted() + 1);
    const double belt = trace.belt_travel(t0, t1) / (t1 - t0);
    const double deg = trace.handlebar_at(t0);
    emulator_.emit_from(trace);  // keeps the frame clock in step
    return joystick_to_input(belt / config_.max_slide_speed, deg / 90.0, time_s).input;
  }
  const auto frame = emulator_.emit_from(trace);
  const auto packet = encode_frame(frame);
  ++stats_.frames_sent;
  if (!link_.deliver()) {
    ++stats_.frames_dropped;
    return std::nullopt;
  }
  const auto decoded = decode_frame(packet);
  if (const auto* f = std::get_if<EncoderFrame>(&decoded)) {
    return reader_.consume(std::span<const EncoderFrame>(f, 1), time_s);
  }
  ++stats_.decode_errors;
  return std::nullopt;
}

namespace {

Pipeline make_pipeline(const CityMap& map, const ControlConfig& config, const RunOptions& options) {
  auto shared = std::make_shared<const CityMap>(map);
  Session session(*shared, options.participant_id, options.condition, options.seed, options.session);
  return Pipeline(shared, config, std::move(session));
}

void collect(RunResult& result, const TickResult& tick) {
  for (const auto& e : tick.events)
    if (const auto* tc = std::get_if<event::TrialComplete>(&e)) result.logs.push_back(tc->log);
}

}  // namespace

RunResult run_trace_session(const CityMap& map, const ControlConfig& config,
                            const InputTrace& trace, const RunOptions& options) {
  trace.validate();
  config.validate();
  RunResult result;
  auto pipeline = make_pipeline(map, config, options);
  DeviceLink link(config, options.condition, options.drop_probability, options.drop_seed);
  const double dt = config.device.frame_period_s();

  while (!pipeline.session().finished() && !link.exhausted(trace) &&
         link.frame_time() < options.max_duration_s) {
    const auto input = link.next(trace, link.frame_time());
    collect(result, pipeline.tick(input, dt));
    ++result.ticks;
  }
  result.completed = pipeline.session().finished();
  result.sim_time_s = pipeline.clock();
  result.link = link.stats();
  result.trace = trace;
  return result;
}

RunResult run_pilot_session(const CityMap& map, const ControlConfig& config,
                            const RunOptions& options, const PilotConfig& pilot) {
  config.validate();
  RunResult result;
  auto pipeline = make_pipeline(map, config, options);
  DeviceLink link(config, options.condition, options.drop_probability, options.drop_seed);
  InputTrace trace({}, Interpolation::Step);
  const double dt = config.device.frame_period_s();
  const auto source = input_source_for(options.condition);

  while (!pipeline.session().finished() && link.frame_time() < options.max_duration_s) {
    const double t = link.frame_time();
    const auto* goal = pipeline.session().active_goal();
    const auto& path = map.path_to(goal->id);
    const auto cmd = scripted_pilot(pipeline.avatar(), path, *goal, config.motion, pilot, source, t);
    trace.append({t, cmd.yaw_input * 90.0, cmd.slide_input * config.max_slide_speed});
    const auto input = link.next(trace, t);
    collect(result, pipeline.tick(input, dt));
    ++result.ticks;
  }
  // The rider keeps the last command for a few seconds after the session
  // ends, so a replay whose final dwell runs late (lost frames) still
  // finishes instead of running off the end of the trace.
  const auto& last = trace.keys().back();
  trace.append({link.frame_time() + kPilotTraceTailSeconds, last.handlebar_deg, last.belt_speed_mps});

  result.completed = pipeline.session().finished();
  result.sim_time_s = pipeline.clock();
  result.link = link.stats();
  result.trace = std::move(trace);
  return result;
}

CohortResult simulate_cohort(const CityMap& map, const ControlConfig& config, std::size_t n,
                             std::uint64_t seed) {
  CohortResult cohort;
  cohort.orders = counterbalanced_orders(n, seed);
  for (std::size_t i = 0; i < n; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "P%02zu", i + 1);
    cohort.participants.emplace_back(id);

    std::mt19937_64 rng(mix_seed(seed, i, 0x5EED));
    const auto unit = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    PilotConfig pilot;
    pilot.speed_scale = 0.92 + 0.08 * unit();
    pilot.lookahead_m = 6.0 + 4.0 * unit();

    for (const auto condition : cohort.orders[i]) {
      RunOptions opts;
      opts.participant_id = id;
      opts.condition = condition;
      opts.seed = mix_seed(seed, i, condition == Condition::Scooter ? 1 : 2);
      auto run = run_pilot_session(map, config, opts, pilot);
      if (!run.completed)
        throw Error(ErrorKind::InvalidState,
                    std::string("cohort participant ") + id + " did not complete the " +
                        std::string(to_string(condition)) + " session");
      cohort.logs.insert(cohort.logs.end(), run.logs.begin(), run.logs.end());
    }
  }
  return cohort;
}

}  // namespace loco
