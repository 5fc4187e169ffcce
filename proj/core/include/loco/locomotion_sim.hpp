#pragma once

// Planar avatar motion. World frame: x to the right, y down (screen
// convention), heading in degrees measured clockwise from +x, so a positive
// angular velocity turns right.

#include <span>
#include <vector>

namespace loco {

inline constexpr double kDefaultTickSeconds = 0.01;
inline constexpr double kDefaultAvatarRadius = 0.4;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) noexcept { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) noexcept { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) noexcept { return {s * a.x, s * a.y}; }
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

double dot(Vec2 a, Vec2 b) noexcept;
double length(Vec2 a) noexcept;
double distance(Vec2 a, Vec2 b) noexcept;

struct Segment {
  Vec2 a;
  Vec2 b;

  friend bool operator==(const Segment&, const Segment&) = default;
};

Vec2 closest_point(const Segment& s, Vec2 p) noexcept;

struct Pose {
  Vec2 position;
  double heading = 0.0;  // degrees

  friend bool operator==(const Pose&, const Pose&) = default;
};

struct AvatarState {
  Vec2 position;
  double heading = 0.0;  // degrees, [0, 360)
  double v = 0.0;        // m/s along heading
  double w = 0.0;        // deg/s

  Pose pose() const noexcept { return {position, heading}; }
  friend bool operator==(const AvatarState&, const AvatarState&) = default;
};

/// Maps any finite angle to [0, 360).
double wrap_heading(double deg) noexcept;
/// Maps any finite angle to [-180, 180).
double wrap_signed(double deg) noexcept;

/// Semi-implicit Euler: rotate by w*dt first, then translate along the new
/// heading. No lateral component is ever introduced.
AvatarState integrate_pose(const AvatarState& state, double dt) noexcept;

/// Pushes a disc of the given radius out of every penetrated wall along the
/// wall normal and removes the velocity component pointing into the wall.
AvatarState resolve_collision(const AvatarState& state, std::span<const Segment> walls,
                              double radius = kDefaultAvatarRadius) noexcept;

/// Sets the pose exactly and zeroes both velocities.
AvatarState teleport(const AvatarState& state, const Pose& pose) noexcept;

}  // namespace loco
