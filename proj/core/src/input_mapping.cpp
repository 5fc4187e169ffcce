#include "loco/input_mapping.hpp"

#include <algorithm>
#include <cmath>

#include "loco/error.hpp"
#include "text_util.hpp"

namespace loco {

std::string_view to_string(InputSource s) noexcept {
  return s == InputSource::Scooter ? "scooter" : "joystick";
}

namespace {

double clamp_unit(double x) noexcept {
  if (std::isnan(x)) return 0.0;
  return std::clamp(x, -1.0, 1.0);
}

double sign(double x) noexcept { return (x > 0.0) - (x < 0.0); }

double wrap180(double deg) noexcept {
  double r = std::fmod(deg + 180.0, 360.0);
  if (r < 0.0) r += 360.0;
  return r - 180.0;
}

}  // namespace

NormalizedInput NormalizedInput::make(double yaw, double slide, InputSource source,
                                      double time_s) noexcept {
  return {clamp_unit(yaw), clamp_unit(slide), source, time_s};
}

void MotionParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw Error(ErrorKind::InvalidField, std::string(name) + " must be > 0");
  };
  positive(max_linear_speed, "max_linear_speed");
  positive(max_angular_speed, "max_angular_speed");
  positive(linear_accel_limit, "linear_accel_limit");
  positive(angular_accel_limit, "angular_accel_limit");
  if (!(curve_exponent >= 0.0) || !std::isfinite(curve_exponent))
    throw Error(ErrorKind::InvalidField, "curve_exponent must be >= 0");
  if (!(deadzone >= 0.0 && deadzone <= 0.2))
    throw Error(ErrorKind::InvalidField, "deadzone must be within [0, 0.2]");
}

void ControlConfig::validate() const {
  motion.validate();
  device.validate();
  if (!(max_slide_speed > 0.0) || !std::isfinite(max_slide_speed))
    throw Error(ErrorKind::InvalidField, "max_slide_speed must be > 0");
}

ControlConfig parse_control_config(std::string_view text) {
  ControlConfig cfg;
  std::size_t line_no = 0;
  for (auto raw : detail::split_lines(text)) {
    ++line_no;
    auto line = detail::trim(detail::strip_comment(raw));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const auto where = "line " + std::to_string(line_no) + ": ";
    if (eq == std::string_view::npos)
      throw Error(ErrorKind::MalformedConfig, where + "expected key = value");
    const auto key = detail::trim(line.substr(0, eq));
    const auto value = detail::trim(line.substr(eq + 1));

    auto number = [&](double& out) {
      if (!detail::parse_double(value, out))
        throw Error(ErrorKind::MalformedConfig, where + "bad number for " + std::string(key));
    };
    if (key == "max_linear_speed") number(cfg.motion.max_linear_speed);
    else if (key == "max_angular_speed") number(cfg.motion.max_angular_speed);
    else if (key == "linear_accel_limit") number(cfg.motion.linear_accel_limit);
    else if (key == "angular_accel_limit") number(cfg.motion.angular_accel_limit);
    else if (key == "curve_exponent") number(cfg.motion.curve_exponent);
    else if (key == "deadzone") number(cfg.motion.deadzone);
    else if (key == "max_slide_speed") number(cfg.max_slide_speed);
    else if (key == "counts_per_meter") number(cfg.device.counts_per_meter);
    else if (key == "sample_rate_hz") number(cfg.device.sample_rate_hz);
    else if (key == "center_raw") {
      unsigned v = 0;
      if (!detail::parse_int(value, v) || v > kHandlebarMax)
        throw Error(ErrorKind::MalformedConfig, where + "center_raw must be in [0, 16383]");
      cfg.device.center_raw = static_cast<std::uint16_t>(v);
    } else if (key == "yaw_mode") {
      if (value == "rate") cfg.motion.yaw_mode = YawMode::RateControl;
      else if (value == "direct") cfg.motion.yaw_mode = YawMode::DirectHeading;
      else throw Error(ErrorKind::MalformedConfig, where + "yaw_mode must be rate|direct");
    } else {
      throw Error(ErrorKind::MalformedConfig, where + "unknown key '" + std::string(key) + "'");
    }
  }
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::MalformedConfig, e.what());
  }
  return cfg;
}

ControlConfig load_control_config(const std::filesystem::path& path) {
  return parse_control_config(detail::read_file(path));
}

std::string format_control_config(const ControlConfig& c) {
  using detail::format_double;
  std::string s;
  s += "# motion parameters (shared by both conditions)\n";
  s += "max_linear_speed = " + format_double(c.motion.max_linear_speed) + "   # m/s\n";
  s += "max_angular_speed = " + format_double(c.motion.max_angular_speed) + "   # deg/s\n";
  s += "linear_accel_limit = " + format_double(c.motion.linear_accel_limit) + "   # m/s^2\n";
  s += "angular_accel_limit = " + format_double(c.motion.angular_accel_limit) + "   # deg/s^2\n";
  s += "curve_exponent = " + format_double(c.motion.curve_exponent) + "\n";
  s += "deadzone = " + format_double(c.motion.deadzone) + "\n";
  s += std::string("yaw_mode = ") +
       (c.motion.yaw_mode == YawMode::RateControl ? "rate" : "direct") + "\n";
  s += "# scooter device\n";
  s += "max_slide_speed = " + format_double(c.max_slide_speed) + "   # m/s belt speed at full slide\n";
  s += "center_raw = " + std::to_string(c.device.center_raw) + "\n";
  s += "counts_per_meter = " + format_double(c.device.counts_per_meter) + "\n";
  s += "sample_rate_hz = " + format_double(c.device.sample_rate_hz) + "\n";
  return s;
}

double handlebar_angle_deg(std::uint16_t raw, const DeviceCalibration& calib) {
  if (raw > kHandlebarMax)
    throw Error(ErrorKind::InvalidField, "handlebar_raw " + std::to_string(raw) + " out of range");
  const int half = static_cast<int>(kEncoderCountsPerTurn / 2);
  int d = static_cast<int>(raw) - static_cast<int>(calib.center_raw);
  if (d > half) d -= static_cast<int>(kEncoderCountsPerTurn);
  if (d <= -half) d += static_cast<int>(kEncoderCountsPerTurn);
  return d * 360.0 / kEncoderCountsPerTurn;
}

double handlebar_to_yaw(std::uint16_t raw, const DeviceCalibration& calib) {
  return std::clamp(handlebar_angle_deg(raw, calib) / 90.0, -1.0, 1.0);
}

double counts_to_slide(std::int32_t delta, double dt, const DeviceCalibration& calib,
                       double max_slide_speed) {
  const double belt_speed = delta / (calib.counts_per_meter * dt);
  return std::clamp(belt_speed / max_slide_speed, -1.0, 1.0);
}

JoystickInput joystick_to_input(double left_y, double right_x, double time_s) {
  const bool clamped = !(left_y >= -1.0 && left_y <= 1.0) || !(right_x >= -1.0 && right_x <= 1.0);
  return {NormalizedInput::make(right_x, left_y, InputSource::Joystick, time_s), clamped};
}

NormalizedInput scooter_to_input(const EncoderFrame& frame, const ControlConfig& config,
                                 double time_s) {
  const double yaw = handlebar_to_yaw(frame.handlebar_raw, config.device);
  const double slide = counts_to_slide(frame.treadmill_delta, config.device.frame_period_s(),
                                       config.device, config.max_slide_speed);
  return NormalizedInput::make(yaw, slide, InputSource::Scooter, time_s);
}

double apply_deadzone(double x, double deadzone) noexcept {
  const double mag = std::max(0.0, (std::abs(x) - deadzone) / (1.0 - deadzone));
  return sign(x) * mag;
}

VelocityTarget target_velocities(const NormalizedInput& input, const MotionParams& params) noexcept {
  const double s = apply_deadzone(input.slide_input, params.deadzone);
  const double y = apply_deadzone(input.yaw_input, params.deadzone);
  VelocityTarget t;
  t.linear = params.max_linear_speed * sign(s) * std::pow(std::abs(s), params.curve_exponent);
  if (s == 0.0) t.linear = 0.0;  // pow(0, 0) == 1
  t.angular = params.max_angular_speed * y;
  return t;
}

double direct_heading_rate(double yaw_input, double heading_deg, double reference_heading_deg,
                           const MotionParams& params, double dt) noexcept {
  const double offset = 90.0 * apply_deadzone(yaw_input, params.deadzone);
  const double error = wrap180(reference_heading_deg + offset - heading_deg);
  return std::clamp(error / dt, -params.max_angular_speed, params.max_angular_speed);
}

double clamp_step(double current, double target, double accel_limit, double dt) noexcept {
  const double max_change = accel_limit * dt;
  const double diff = target - current;
  if (std::abs(diff) <= max_change) return target;
  return current + (diff > 0.0 ? max_change : -max_change);
}

}  // namespace loco
