#pragma once

// Live host runtime. A single tick thread owns the Pipeline; the UDP
// receiver and the WebSocket clients run on a separate I/O thread and talk
// to the tick thread only through message queues. Published snapshots are
// immutable strings.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "loco/headless.hpp"
#include "loco/message_queue.hpp"
#include "loco/pipeline.hpp"

namespace loco {

inline constexpr std::uint16_t kDefaultWsPort = 47802;
inline constexpr double kTickRateHz = 100.0;

struct UdpInput {
  std::uint16_t port = kDefaultUdpPort;
};
struct TraceInput {
  std::filesystem::path path;
};
struct ClientInput {};
using InputConfig = std::variant<UdpInput, TraceInput, ClientInput>;

std::string_view input_kind(const InputConfig& input) noexcept;

struct SessionConfig {
  std::filesystem::path map_path;
  std::filesystem::path params_path;
  Condition condition = Condition::Scooter;
  std::string participant_id = "P01";
  std::uint64_t seed = 1;
  InputConfig input = UdpInput{};
  double snapshot_rate_hz = 30.0;
  std::uint16_t ws_port = kDefaultWsPort;
  std::filesystem::path out_dir = "logs";
  bool autostart = false;
  /// Wall-clock acceleration of the tick loop; simulated dt stays 10 ms.
  double speedup = 1.0;

  void validate() const;
};

/// `key = value` text. Keys: map, params, condition, participant, seed,
/// input (udp[:port] | trace:<path> | client), snapshot_rate_hz, ws_port,
/// out, autostart, speedup. Relative paths resolve against base_dir. Throws
/// Error(MalformedConfig).
SessionConfig parse_session_config(std::string_view text,
                                   const std::filesystem::path& base_dir = {});
SessionConfig load_session_config(const std::filesystem::path& path);
/// LOCO_UDP_PORT and LOCO_WS_PORT override the file.
void apply_env_overrides(SessionConfig& config);

enum class RunState { Idle, Running, Paused, Finished, Aborted };
std::string_view to_string(RunState s) noexcept;

struct Command {
  std::string cmd;  // start | pause | resume | abort | inject_input | set_condition
  double yaw = 0.0;
  double slide = 0.0;
  std::optional<Condition> condition;
  std::optional<std::string> id;  // echoed in the reply
};

struct CommandReply {
  bool ok = true;
  std::string error;    // "invalid-state", "invalid-command"
  std::string message;
  std::optional<std::string> id;
};

/// Parses {"type":"command","cmd":...}. Throws Error(Parse).
Command parse_command(std::string_view json);
std::string reply_to_json(const CommandReply& reply, RunState state);

/// Session state machine driven by the tick loop: owns the pipeline, the
/// run state and the active input source.
class SessionController {
 public:
  SessionController(std::shared_ptr<const CityMap> map, ControlConfig control,
                    SessionConfig config);

  CommandReply handle_command(const Command& cmd);

  /// Scooter frames received from the network since the last tick.
  void feed_frames(std::span<const EncoderFrame> frames);

  /// Advances one tick when Running. Returns nothing while Idle or Paused.
  std::optional<TickResult> tick(double dt);

  RunState state() const noexcept { return state_; }
  const Pipeline& pipeline() const noexcept { return *pipeline_; }
  const SessionConfig& config() const noexcept { return config_; }
  /// Completed and aborted trial logs in order.
  const std::vector<TrialLog>& logs() const noexcept { return logs_; }
  bool done() const noexcept { return state_ == RunState::Finished || state_ == RunState::Aborted; }
  /// Events produced outside tick() (abort), drained by the loop.
  std::vector<SessionEvent> take_events();
  std::uint64_t frames_rejected() const noexcept;

 private:
  void rebuild();
  void record(const std::vector<SessionEvent>& events);
  CommandReply reject(const Command& cmd, std::string message) const;

  std::shared_ptr<const CityMap> map_;
  ControlConfig control_;
  SessionConfig config_;
  std::unique_ptr<Pipeline> pipeline_;
  RunState state_ = RunState::Idle;
  std::vector<EncoderFrame> pending_frames_;
  std::unique_ptr<ScooterFrameReader> reader_;
  std::optional<NormalizedInput> injected_;
  std::optional<InputTrace> trace_;
  std::unique_ptr<DeviceLink> trace_link_;
  std::vector<TrialLog> logs_;
  std::vector<SessionEvent> extra_events_;
};

// JSON wire messages for WebSocket clients.
std::string snapshot_to_json(const StateSnapshot& snapshot, RunState state);
std::string event_to_json(const SessionEvent& event, double time_s);
std::string hello_to_json(const CityMap& map, const SessionConfig& config, RunState state);

struct ExitReport {
  RunState final_state = RunState::Idle;
  std::vector<TrialLog> logs;
  std::filesystem::path out_dir;
  std::uint64_t frames_received = 0;
  std::uint64_t frames_rejected = 0;
  std::uint64_t ticks = 0;
  double max_tick_compute_ms = 0.0;
};

std::string exit_report_to_json(const ExitReport& report);

class LiveServer {
 public:
  /// Loads map and params, binds the UDP (if used) and WebSocket ports.
  /// Throws Error(FileNotFound | MalformedConfig | PortInUse).
  explicit LiveServer(SessionConfig config);
  ~LiveServer();
  LiveServer(const LiveServer&) = delete;
  LiveServer& operator=(const LiveServer&) = delete;

  std::uint16_t udp_port() const noexcept;
  std::uint16_t ws_port() const noexcept;

  /// Starts the I/O and tick threads.
  void start();
  /// Blocks until the session finishes, is aborted, or stop() is called;
  /// writes logs and returns the report.
  ExitReport wait();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Convenience: serve until done.
ExitReport run_session(const SessionConfig& config);

}  // namespace loco
