#include <algorithm>
#include <cmath>
#include <numbers>

#include "loco/task_engine.hpp"

namespace loco {

Vec2 lookahead_point(std::span<const Vec2> path, Vec2 p, double lookahead) noexcept {
  if (path.empty()) return p;
  if (path.size() == 1) return path.front();

  // Walk segments from the end; the first circle intersection found is the
  // farthest by arc length.
  if (distance(path.back(), p) <= lookahead) return path.back();
  for (std::size_t i = path.size() - 1; i-- > 0;) {
    const Vec2 a = path[i];
    const Vec2 d = path[i + 1] - a;
    const Vec2 f = a - p;
    const double qa = dot(d, d);
    if (qa == 0.0) continue;
    const double qb = 2.0 * dot(f, d);
    const double qc = dot(f, f) - lookahead * lookahead;
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc < 0.0) continue;
    const double root = std::sqrt(disc);
    const double u_far = (-qb + root) / (2.0 * qa);
    const double u_near = (-qb - root) / (2.0 * qa);
    if (u_far >= 0.0 && u_far <= 1.0) return a + u_far * d;
    if (u_near >= 0.0 && u_near <= 1.0) return a + u_near * d;
  }

  Vec2 best = path.front();
  double best_d = distance(best, p);
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const Vec2 c = closest_point({path[i], path[i + 1]}, p);
    const double dc = distance(c, p);
    if (dc < best_d) {
      best_d = dc;
      best = c;
    }
  }
  return best;
}

NormalizedInput scripted_pilot(const AvatarState& avatar, std::span<const Vec2> path,
                               const GoalZone& goal, const MotionParams& params,
                               const PilotConfig& pilot, InputSource source, double time_s) {
  const Vec2 target = lookahead_point(path, avatar.position, pilot.lookahead_m);
  const Vec2 to_target = target - avatar.position;
  double error = 0.0;
  if (length(to_target) > 1e-9) {
    const double bearing = std::atan2(to_target.y, to_target.x) * 180.0 / std::numbers::pi;
    error = wrap_signed(bearing - avatar.heading);
  }
  const double yaw = std::clamp(error / 90.0, -1.0, 1.0);

  if (goal.contains(avatar.position)) return NormalizedInput::make(yaw, 0.0, source, time_s);

  const double abs_err = std::abs(error);
  double slide = abs_err < 45.0 ? 1.0 : 1.0 - 0.8 * (abs_err - 45.0) / 135.0;
  slide = std::min(slide, pilot.speed_scale);

  // Cap speed so the avatar can stop at the goal center.
  if (params.curve_exponent > 0.0) {
    const double remaining = distance(avatar.position, goal.center);
    const double v_allowed = std::sqrt(2.0 * pilot.braking_decel * remaining);
    if (v_allowed < params.max_linear_speed) {
      const double shaped = std::pow(v_allowed / params.max_linear_speed, 1.0 / params.curve_exponent);
      const double cap = params.deadzone + (1.0 - params.deadzone) * shaped;
      slide = std::min(slide, cap);
    }
  }
  return NormalizedInput::make(yaw, slide, source, time_s);
}

}  // namespace loco
