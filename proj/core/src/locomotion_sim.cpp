#include "loco/locomotion_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace loco {

namespace {
constexpr double kDegToRad = std::numbers::pi / 180.0;
}

double dot(Vec2 a, Vec2 b) noexcept { return a.x * b.x + a.y * b.y; }
double length(Vec2 a) noexcept { return std::hypot(a.x, a.y); }
double distance(Vec2 a, Vec2 b) noexcept { return length(a - b); }

Vec2 closest_point(const Segment& s, Vec2 p) noexcept {
  const Vec2 ab = s.b - s.a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return s.a;
  const double u = std::clamp(dot(p - s.a, ab) / len2, 0.0, 1.0);
  return s.a + u * ab;
}

double wrap_heading(double deg) noexcept {
  double r = std::fmod(deg, 360.0);
  if (r < 0.0) r += 360.0;
  if (r >= 360.0) r = 0.0;
  return r;
}

double wrap_signed(double deg) noexcept { return wrap_heading(deg + 180.0) - 180.0; }

AvatarState integrate_pose(const AvatarState& s, double dt) noexcept {
  AvatarState out = s;
  out.heading = wrap_heading(s.heading + s.w * dt);
  const double rad = out.heading * kDegToRad;
  out.position.x = s.position.x + s.v * dt * std::cos(rad);
  out.position.y = s.position.y + s.v * dt * std::sin(rad);
  return out;
}

AvatarState resolve_collision(const AvatarState& state, std::span<const Segment> walls,
                              double radius) noexcept {
  AvatarState out = state;
  const double rad = out.heading * kDegToRad;
  const Vec2 dir{std::cos(rad), std::sin(rad)};
  for (const auto& wall : walls) {
    // Cheap reject on the wall's bounding box grown by the radius.
    const Vec2 p = out.position;
    if (p.x + radius < std::min(wall.a.x, wall.b.x) || p.x - radius > std::max(wall.a.x, wall.b.x) ||
        p.y + radius < std::min(wall.a.y, wall.b.y) || p.y - radius > std::max(wall.a.y, wall.b.y))
      continue;
    const Vec2 c = closest_point(wall, p);
    const Vec2 away = p - c;
    const double d = length(away);
    if (d >= radius) continue;

    Vec2 n;
    if (d > 0.0) {
      n = (1.0 / d) * away;
    } else {
      // Center exactly on the wall: back out against the direction of travel.
      const Vec2 ab = wall.b - wall.a;
      const double len = length(ab);
      n = len > 0.0 ? Vec2{-ab.y / len, ab.x / len} : Vec2{-dir.x, -dir.y};
      if (dot(n, dir) * out.v > 0.0) n = -1.0 * n;
    }
    out.position = c + radius * n;
    const double into = out.v * dot(dir, n);
    if (into < 0.0) out.v -= into * dot(n, dir);
  }
  return out;
}

AvatarState teleport(const AvatarState& state, const Pose& pose) noexcept {
  AvatarState out = state;
  out.position = pose.position;
  out.heading = wrap_heading(pose.heading);
  out.v = 0.0;
  out.w = 0.0;
  return out;
}

}  // namespace loco
