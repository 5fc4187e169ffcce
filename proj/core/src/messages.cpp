#include <nlohmann/json.hpp>

#include "loco/error.hpp"
#include "loco/host_service.hpp"

namespace loco {

using nlohmann::ordered_json;

namespace {

ordered_json pose_json(const Pose& p) {
  return {{"x", p.position.x}, {"y", p.position.y}, {"heading", p.heading}};
}

struct EventFields {
  ordered_json& j;

  void operator()(const event::TrialStarted& e) const {
    j["trial_index"] = e.trial_index;
    j["goal_id"] = e.goal_id;
    j["goal_name"] = e.goal_name;
    j["prompt"] = e.prompt;
  }
  void operator()(const event::DwellStarted&) const {}
  void operator()(const event::DwellReset& e) const { j["elapsed_s"] = e.elapsed_s; }
  void operator()(const event::TrialComplete& e) const {
    j["participant"] = e.log.participant_id;
    j["condition"] = std::string(to_string(e.log.condition));
    j["goal_id"] = e.log.goal_id;
    j["trial_index"] = e.log.trial_index;
    j["completion_time_s"] = e.log.completion_time_s;
    j["aborted"] = e.log.aborted;
  }
  void operator()(const event::Teleport& e) const { j["pose"] = pose_json(e.pose); }
  void operator()(const event::SessionComplete&) const {}
  void operator()(const event::Warning& e) const { j["message"] = e.message; }
};

}  // namespace

std::string snapshot_to_json(const StateSnapshot& s, RunState state) {
  ordered_json j;
  j["type"] = "snapshot";
  j["state"] = std::string(to_string(state));
  j["wall_time_s"] = s.wall_time_s;
  j["avatar"] = {{"x", s.avatar.position.x},
                 {"y", s.avatar.position.y},
                 {"heading", s.avatar.heading},
                 {"v", s.avatar.v},
                 {"w", s.avatar.w}};
  j["input"] = {{"yaw", s.input.yaw_input},
                {"slide", s.input.slide_input},
                {"source", std::string(to_string(s.input.source))},
                {"stale", s.input_stale}};
  if (s.goal_id.empty()) j["goal"] = nullptr;
  else j["goal"] = {{"id", s.goal_id}, {"name", s.goal_name}};
  j["phase"] = std::string(to_string(s.phase));
  j["dwell_elapsed_s"] = s.dwell_elapsed_s;
  j["dwell_required_s"] = kDwellRequiredSeconds;
  j["trial_index"] = s.trial_index;
  j["trial_total"] = s.trial_total;
  j["session_complete"] = s.session_complete;
  return j.dump();
}

std::string event_to_json(const SessionEvent& e, double time_s) {
  ordered_json j;
  j["type"] = "event";
  j["kind"] = std::string(event_kind(e));
  j["time_s"] = time_s;
  std::visit(EventFields{j}, e);
  return j.dump();
}

std::string hello_to_json(const CityMap& map, const SessionConfig& config, RunState state) {
  ordered_json j;
  j["type"] = "hello";
  j["participant"] = config.participant_id;
  j["condition"] = std::string(to_string(config.condition));
  j["input"] = std::string(input_kind(config.input));
  j["state"] = std::string(to_string(state));
  j["snapshot_rate_hz"] = config.snapshot_rate_hz;
  j["map"] = ordered_json::parse(map_to_json(map));
  return j.dump();
}

Command parse_command(std::string_view text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("command is not JSON: ") + e.what());
  }
  if (!j.is_object() || j.value("type", "") != "command")
    throw Error(ErrorKind::Parse, "expected {\"type\":\"command\", ...}");
  if (!j.contains("cmd") || !j["cmd"].is_string())
    throw Error(ErrorKind::Parse, "command needs a string 'cmd'");

  Command cmd;
  cmd.cmd = j["cmd"].get<std::string>();
  // Arguments may sit next to cmd or inside "args".
  const ordered_json& args = j.contains("args") && j["args"].is_object() ? j["args"] : j;
  auto number = [&](const char* key, double& out) {
    if (!args.contains(key)) return;
    if (!args[key].is_number()) throw Error(ErrorKind::Parse, std::string("'") + key + "' must be a number");
    out = args[key].get<double>();
  };
  number("yaw", cmd.yaw);
  number("slide", cmd.slide);
  if (args.contains("condition")) {
    if (!args["condition"].is_string()) throw Error(ErrorKind::Parse, "'condition' must be a string");
    cmd.condition = parse_condition(args["condition"].get<std::string>());
  }
  if (j.contains("id")) cmd.id = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
  return cmd;
}

std::string reply_to_json(const CommandReply& reply, RunState state) {
  ordered_json j;
  j["type"] = "reply";
  if (reply.id) j["id"] = *reply.id;
  j["ok"] = reply.ok;
  if (!reply.ok) {
    j["error"] = reply.error;
    j["message"] = reply.message;
  }
  j["state"] = std::string(to_string(state));
  return j.dump();
}

std::string exit_report_to_json(const ExitReport& r) {
  ordered_json j;
  j["state"] = std::string(to_string(r.final_state));
  j["out_dir"] = r.out_dir.string();
  j["ticks"] = r.ticks;
  j["frames_received"] = r.frames_received;
  j["frames_rejected"] = r.frames_rejected;
  j["max_tick_compute_ms"] = r.max_tick_compute_ms;
  auto trials = ordered_json::array();
  for (const auto& log : r.logs)
    trials.push_back({{"trial_index", log.trial_index},
                      {"goal", log.goal_id},
                      {"completion_time_s", log.completion_time_s},
                      {"aborted", log.aborted}});
  j["trials"] = std::move(trials);
  return j.dump(2);
}

}  // namespace loco
