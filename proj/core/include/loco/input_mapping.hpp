#pragma once

// Device frames / joystick axes -> normalized [yaw, slide] -> clamped target
// velocities. Both input sources share everything after normalization.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "loco/device_emulator.hpp"

namespace loco {

enum class InputSource { Scooter, Joystick };

std::string_view to_string(InputSource s) noexcept;

struct NormalizedInput {
  double yaw_input = 0.0;    // [-1, 1], positive turns clockwise (right)
  double slide_input = 0.0;  // [-1, 1], positive drives forward
  InputSource source = InputSource::Scooter;
  double time_s = 0.0;

  /// Clamps both channels to [-1, 1]; NaN becomes 0.
  static NormalizedInput make(double yaw, double slide, InputSource source, double time_s) noexcept;

  friend bool operator==(const NormalizedInput&, const NormalizedInput&) = default;
};

enum class YawMode { RateControl, DirectHeading };

struct MotionParams {
  double max_linear_speed = 5.0;       // m/s
  double max_angular_speed = 90.0;     // deg/s
  double linear_accel_limit = 4.0;     // m/s^2
  double angular_accel_limit = 360.0;  // deg/s^2
  double curve_exponent = 1.0;
  double deadzone = 0.05;
  YawMode yaw_mode = YawMode::RateControl;

  void validate() const;
};

/// Everything the params file carries: motion parameters shared by both
/// conditions plus the scooter-side calibration.
struct ControlConfig {
  MotionParams motion;
  DeviceCalibration device;
  double max_slide_speed = 1.0;  // m/s of belt travel that maps to slide 1.0

  void validate() const;
};

/// `key = value` lines, `#` comments. Unknown keys and bad values throw
/// Error(MalformedConfig).
ControlConfig parse_control_config(std::string_view text);
ControlConfig load_control_config(const std::filesystem::path& path);
std::string format_control_config(const ControlConfig& config);

/// Shortest signed angular distance from center_raw, in degrees.
double handlebar_angle_deg(std::uint16_t raw, const DeviceCalibration& calib);
double handlebar_to_yaw(std::uint16_t raw, const DeviceCalibration& calib);
double counts_to_slide(std::int32_t delta, double dt, const DeviceCalibration& calib,
                       double max_slide_speed);

struct JoystickInput {
  NormalizedInput input;
  bool clamped = false;  // an axis overshot [-1, 1]
};

JoystickInput joystick_to_input(double left_y, double right_x, double time_s = 0.0);

NormalizedInput scooter_to_input(const EncoderFrame& frame, const ControlConfig& config,
                                 double time_s = 0.0);

/// sign(x) * max(0, (|x| - deadzone) / (1 - deadzone)).
double apply_deadzone(double x, double deadzone) noexcept;

struct VelocityTarget {
  double linear = 0.0;   // m/s
  double angular = 0.0;  // deg/s

  friend bool operator==(const VelocityTarget&, const VelocityTarget&) = default;
};

/// Rate-control mapping. In DirectHeading mode only `linear` is meaningful;
/// the angular target comes from direct_heading_rate().
VelocityTarget target_velocities(const NormalizedInput& input, const MotionParams& params) noexcept;

/// DirectHeading mode: the handlebar selects a heading offset of up to 90
/// degrees from reference_heading; returns the angular rate that closes the
/// remaining error within one tick, capped at max_angular_speed.
double direct_heading_rate(double yaw_input, double heading_deg, double reference_heading_deg,
                           const MotionParams& params, double dt) noexcept;

double clamp_step(double current, double target, double accel_limit, double dt) noexcept;

}  // namespace loco
