#include <cstdlib>

#include "loco/error.hpp"
#include "loco/host_service.hpp"
#include "text_util.hpp"

namespace loco {

namespace {

std::filesystem::path resolve(std::string_view value, const std::filesystem::path& base) {
  std::filesystem::path p{std::string(value)};
  if (p.is_relative() && !base.empty()) p = base / p;
  return p;
}

std::uint16_t parse_port(std::string_view value, const std::string& where) {
  unsigned v = 0;
  if (!detail::parse_int(value, v) || v == 0 || v > 65535)
    throw Error(ErrorKind::MalformedConfig, where + "port must be in [1, 65535]");
  return static_cast<std::uint16_t>(v);
}

}  // namespace

std::string_view input_kind(const InputConfig& input) noexcept {
  switch (input.index()) {
    case 0: return "udp";
    case 1: return "trace";
    default: return "client";
  }
}

void SessionConfig::validate() const {
  if (!(snapshot_rate_hz > 0.0) || snapshot_rate_hz > kTickRateHz)
    throw Error(ErrorKind::MalformedConfig, "snapshot_rate_hz must be in (0, 100]");
  if (!(speedup >= 1.0) || speedup > 1000.0)
    throw Error(ErrorKind::MalformedConfig, "speedup must be in [1, 1000]");
  if (participant_id.empty()) throw Error(ErrorKind::MalformedConfig, "participant must not be empty");
  if (const auto* t = std::get_if<TraceInput>(&input); t && t->path.empty())
    throw Error(ErrorKind::MalformedConfig, "trace input needs a path");
}

SessionConfig parse_session_config(std::string_view text, const std::filesystem::path& base_dir) {
  SessionConfig cfg;
  std::size_t line_no = 0;
  for (auto raw : detail::split_lines(text)) {
    ++line_no;
    auto line = detail::trim(detail::strip_comment(raw));
    if (line.empty()) continue;
    const auto where = "line " + std::to_string(line_no) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorKind::MalformedConfig, where + "expected key = value");
    const auto key = detail::trim(line.substr(0, eq));
    const auto value = detail::trim(line.substr(eq + 1));

    if (key == "map") {
      cfg.map_path = resolve(value, base_dir);
    } else if (key == "params") {
      cfg.params_path = resolve(value, base_dir);
    } else if (key == "condition") {
      try {
        cfg.condition = parse_condition(value);
      } catch (const Error&) {
        throw Error(ErrorKind::MalformedConfig, where + "condition must be scooter|joystick");
      }
    } else if (key == "participant") {
      cfg.participant_id = std::string(value);
    } else if (key == "seed") {
      if (!detail::parse_int(value, cfg.seed))
        throw Error(ErrorKind::MalformedConfig, where + "bad seed");
    } else if (key == "input") {
      if (value == "udp") {
        cfg.input = UdpInput{};
      } else if (value.starts_with("udp:")) {
        cfg.input = UdpInput{parse_port(value.substr(4), where)};
      } else if (value.starts_with("trace:")) {
        cfg.input = TraceInput{resolve(detail::trim(value.substr(6)), base_dir)};
      } else if (value == "client") {
        cfg.input = ClientInput{};
      } else {
        throw Error(ErrorKind::MalformedConfig,
                    where + "input must be udp[:port] | trace:<path> | client");
      }
    } else if (key == "snapshot_rate_hz") {
      if (!detail::parse_double(value, cfg.snapshot_rate_hz))
        throw Error(ErrorKind::MalformedConfig, where + "bad snapshot_rate_hz");
    } else if (key == "ws_port") {
      cfg.ws_port = parse_port(value, where);
    } else if (key == "out") {
      cfg.out_dir = resolve(value, base_dir);
    } else if (key == "autostart") {
      if (value == "true" || value == "1") cfg.autostart = true;
      else if (value == "false" || value == "0") cfg.autostart = false;
      else throw Error(ErrorKind::MalformedConfig, where + "autostart must be true|false");
    } else if (key == "speedup") {
      if (!detail::parse_double(value, cfg.speedup))
        throw Error(ErrorKind::MalformedConfig, where + "bad speedup");
    } else {
      throw Error(ErrorKind::MalformedConfig, where + "unknown key '" + std::string(key) + "'");
    }
  }
  cfg.validate();
  return cfg;
}

SessionConfig load_session_config(const std::filesystem::path& path) {
  return parse_session_config(detail::read_file(path), path.parent_path());
}

void apply_env_overrides(SessionConfig& config) {
  if (const char* v = std::getenv("LOCO_UDP_PORT"); v && *v) {
    const auto port = parse_port(v, "LOCO_UDP_PORT: ");
    if (auto* udp = std::get_if<UdpInput>(&config.input)) udp->port = port;
  }
  if (const char* v = std::getenv("LOCO_WS_PORT"); v && *v)
    config.ws_port = parse_port(v, "LOCO_WS_PORT: ");
}

}  // namespace loco
