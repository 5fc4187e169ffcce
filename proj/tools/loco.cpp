// loco: command-line front end for the locomotion host.

#include <chrono>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <thread>

#include <boost/asio.hpp>

#include "CLI11.hpp"
#include "loco/analysis.hpp"
#include "loco/error.hpp"
#include "loco/headless.hpp"
#include "loco/host_service.hpp"

namespace {

enum Exit : int {
  kOk = 0,
  kFailure = 1,
  kFileNotFound = 3,
  kMalformedConfig = 4,
  kPortInUse = 5,
  kIncomplete = 6,
};

int exit_code(loco::ErrorKind kind) {
  switch (kind) {
    case loco::ErrorKind::FileNotFound: return kFileNotFound;
    case loco::ErrorKind::MalformedConfig:
    case loco::ErrorKind::Parse:
    case loco::ErrorKind::Validation:
    case loco::ErrorKind::InvalidTrace: return kMalformedConfig;
    case loco::ErrorKind::PortInUse: return kPortInUse;
    default: return kFailure;
  }
}

loco::CityMap map_or_default(const std::string& path) {
  return path.empty() ? loco::default_city_map() : loco::load_map(path);
}

loco::ControlConfig params_or_default(const std::string& path) {
  return path.empty() ? loco::ControlConfig{} : loco::load_control_config(path);
}

void print_logs(const std::vector<loco::TrialLog>& logs) {
  std::printf("%-6s %-10s %-12s %12s %s\n", "trial", "condition", "goal", "time_s", "status");
  for (const auto& log : logs)
    std::printf("%-6d %-10s %-12s %12.2f %s\n", log.trial_index,
                std::string(loco::to_string(log.condition)).c_str(), log.goal_id.c_str(),
                log.completion_time_s, log.aborted ? "aborted" : "ok");
}

struct Common {
  std::string map;
  std::string params;
  std::string condition = "scooter";
  std::string participant = "P01";
  std::uint64_t seed = 1;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--map", c.map, "map JSON (default: built-in city)");
  cmd->add_option("--params", c.params, "motion parameter file (key = value)");
  cmd->add_option("--condition", c.condition, "scooter | joystick")
      ->check(CLI::IsMember({"scooter", "joystick"}));
  cmd->add_option("--participant", c.participant, "participant id");
  cmd->add_option("--seed", c.seed, "trial-order seed");
}

int cmd_serve(const std::string& config_path) {
  auto config = loco::load_session_config(config_path);
  loco::LiveServer server(config);
  std::fprintf(stderr, "loco: input %s, udp %u, websocket %u\n",
               std::string(loco::input_kind(config.input)).c_str(), server.udp_port(),
               server.ws_port());
  // Ctrl-C ends the session cleanly so completed trials still get written.
  boost::asio::io_context signal_io;
  boost::asio::signal_set signals(signal_io, SIGINT, SIGTERM);
  signals.async_wait([&](const boost::system::error_code& ec, int) {
    if (!ec) server.stop();
  });
  std::thread signal_thread([&] { signal_io.run(); });
  server.start();
  const auto report = server.wait();
  signal_io.stop();
  signal_thread.join();
  std::cout << loco::exit_report_to_json(report) << '\n';
  return report.final_state == loco::RunState::Finished ? kOk : kIncomplete;
}

int cmd_run(const Common& c, const std::string& trace_path, const std::string& out, double drop,
            std::uint64_t drop_seed) {
  const auto map = map_or_default(c.map);
  const auto params = params_or_default(c.params);
  const auto trace = loco::load_trace(trace_path);
  loco::RunOptions opts;
  opts.participant_id = c.participant;
  opts.condition = loco::parse_condition(c.condition);
  opts.seed = c.seed;
  opts.drop_probability = drop;
  opts.drop_seed = drop_seed;
  const auto result = loco::run_trace_session(map, params, trace, opts);
  if (!out.empty()) loco::write_trial_logs(out, result.logs);
  print_logs(result.logs);
  std::printf("ticks %llu, simulated %.2f s, frames sent %llu dropped %llu\n",
              static_cast<unsigned long long>(result.ticks), result.sim_time_s,
              static_cast<unsigned long long>(result.link.frames_sent),
              static_cast<unsigned long long>(result.link.frames_dropped));
  return result.completed ? kOk : kIncomplete;
}

int cmd_pilot(const Common& c, const std::string& goal, const std::string& out,
              const std::string& logs_dir) {
  const auto map = map_or_default(c.map);
  const auto params = params_or_default(c.params);
  loco::RunOptions opts;
  opts.participant_id = c.participant;
  opts.condition = loco::parse_condition(c.condition);
  opts.seed = c.seed;
  if (!goal.empty()) {
    (void)map.goal(goal);  // throws for unknown ids
    opts.session.fixed_order = {goal};
  }
  const auto result = loco::run_pilot_session(map, params, opts);
  const auto text = loco::format_trace(result.trace);
  if (out.empty() || out == "-") std::cout << text;
  else loco::save_trace(result.trace, out);
  if (!logs_dir.empty()) loco::write_trial_logs(logs_dir, result.logs);
  if (!out.empty() && out != "-") print_logs(result.logs);
  return result.completed ? kOk : kIncomplete;
}

int cmd_analyze(const std::string& logs_path, const std::string& responses, bool json,
                const std::string& tlx_range) {
  const auto logs = loco::read_trial_logs(logs_path);
  std::vector<loco::analysis::ResponseRow> rows;
  if (!responses.empty()) rows = loco::analysis::load_responses_csv(responses);
  loco::analysis::ScoringOptions scoring;
  if (tlx_range == "0-100") {
    scoring.tlx_min = 0.0;
    scoring.tlx_max = 100.0;
  }
  const auto report = loco::analysis::analyze(logs, rows, scoring);
  std::cout << (json ? loco::analysis::report_to_json(report) : loco::analysis::report_to_table(report))
            << '\n';
  return kOk;
}

int cmd_cohort(const Common& c, std::size_t n, const std::string& out) {
  const auto map = map_or_default(c.map);
  const auto params = params_or_default(c.params);
  const auto cohort = loco::simulate_cohort(map, params, n, c.seed);
  if (!out.empty()) loco::write_trial_logs(out, cohort.logs);
  std::size_t scooter_first = 0;
  for (const auto& o : cohort.orders) scooter_first += o[0] == loco::Condition::Scooter;
  std::printf("participants %zu, trial logs %zu, scooter-first %zu, joystick-first %zu\n", n,
              cohort.logs.size(), scooter_first, n - scooter_first);
  return kOk;
}

int cmd_emulate(const Common& c, const std::string& trace_path, const std::string& host,
                std::uint16_t port, double speedup) {
  namespace asio = boost::asio;
  const auto params = params_or_default(c.params);
  const auto trace = loco::load_trace(trace_path);
  asio::io_context io;
  asio::ip::udp::socket socket(io, asio::ip::udp::v4());
  const asio::ip::udp::endpoint target(asio::ip::make_address(host), port);
  loco::DeviceEmulator emulator(params.device);
  const auto start = std::chrono::steady_clock::now();
  std::uint64_t sent = 0;
  while (emulator.next_frame_time() < trace.end_time()) {
    const auto due = start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                 std::chrono::duration<double>(emulator.next_frame_time() / speedup));
    std::this_thread::sleep_until(due);
    const auto packet = loco::encode_frame(emulator.emit_from(trace));
    socket.send_to(asio::buffer(packet), target);
    ++sent;
  }
  std::fprintf(stderr, "loco: sent %llu frames\n", static_cast<unsigned long long>(sent));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Host tools for the scooter locomotion study"};
  app.require_subcommand(1);

  std::string config_path;
  auto* serve = app.add_subcommand("serve", "live session: UDP device input + WebSocket clients");
  serve->add_option("--config", config_path, "session config file")->required();

  Common run_c;
  std::string run_trace, run_out;
  double drop = 0.0;
  std::uint64_t drop_seed = 0;
  auto* run = app.add_subcommand("run", "headless session driven by a device trace");
  add_common(run, run_c);
  run->add_option("--trace", run_trace, "device trace file")->required();
  run->add_option("--out", run_out, "directory for trial_logs.jsonl and summary.csv");
  run->add_option("--drop", drop, "uniform datagram drop probability")->check(CLI::Range(0.0, 1.0));
  run->add_option("--drop-seed", drop_seed, "seed for the drop process");

  Common pilot_c;
  std::string pilot_goal, pilot_out, pilot_logs;
  auto* pilot = app.add_subcommand("pilot", "generate a trace with the scripted pilot");
  add_common(pilot, pilot_c);
  pilot->add_option("--goal", pilot_goal, "single goal id (default: a full six-trial session)");
  pilot->add_option("--out", pilot_out, "trace file (default: stdout)");
  pilot->add_option("--logs", pilot_logs, "also write the pilot's own trial logs here");

  std::string logs_path, responses, tlx_range = "1-7";
  bool json = false;
  auto* analyze = app.add_subcommand("analyze", "descriptives and paired tests over trial logs");
  analyze->add_option("--logs", logs_path, "log directory or .jsonl file")->required();
  analyze->add_option("--responses", responses, "questionnaire responses CSV");
  analyze->add_option("--tlx-range", tlx_range, "raw TLX item range")
      ->check(CLI::IsMember({"1-7", "0-100"}));
  analyze->add_flag("--json", json, "emit JSON instead of a table");

  Common cohort_c;
  std::size_t cohort_n = 14;
  std::string cohort_out;
  auto* cohort = app.add_subcommand("simulate-cohort", "counterbalanced synthetic cohort");
  add_common(cohort, cohort_c);
  cohort->add_option("--n", cohort_n, "participants")->check(CLI::PositiveNumber);
  cohort->add_option("--out", cohort_out, "log directory");

  Common emu_c;
  std::string emu_trace, emu_host = "127.0.0.1";
  std::uint16_t emu_port = loco::kDefaultUdpPort;
  double emu_speedup = 1.0;
  auto* emulate = app.add_subcommand("emulate", "stream a trace as device datagrams in real time");
  add_common(emulate, emu_c);
  emulate->add_option("--trace", emu_trace, "device trace file")->required();
  emulate->add_option("--host", emu_host, "destination address");
  emulate->add_option("--port", emu_port, "destination UDP port");
  emulate->add_option("--speedup", emu_speedup, "wall-clock acceleration")->check(CLI::Range(1.0, 1000.0));

  std::string export_out;
  auto* export_map = app.add_subcommand("export-map", "write the built-in city map as JSON");
  export_map->add_option("--out", export_out, "output file (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve) return cmd_serve(config_path);
    if (*run) return cmd_run(run_c, run_trace, run_out, drop, drop_seed);
    if (*pilot) return cmd_pilot(pilot_c, pilot_goal, pilot_out, pilot_logs);
    if (*analyze) return cmd_analyze(logs_path, responses, json, tlx_range);
    if (*cohort) return cmd_cohort(cohort_c, cohort_n, cohort_out);
    if (*emulate) return cmd_emulate(emu_c, emu_trace, emu_host, emu_port, emu_speedup);
    if (*export_map) {
      const auto text = loco::map_to_json(loco::default_city_map()) + "\n";
      if (export_out.empty()) std::cout << text;
      else std::ofstream(export_out, std::ios::binary) << text;
      return kOk;
    }
  } catch (const loco::Error& e) {
    std::fprintf(stderr, "loco: %s: %s\n", std::string(loco::to_string(e.kind())).c_str(), e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "loco: %s\n", e.what());
    return kFailure;
  }
  return kFailure;
}
