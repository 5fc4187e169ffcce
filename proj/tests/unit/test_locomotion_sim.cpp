#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "loco/locomotion_sim.hpp"

using namespace loco;

TEST(Integrate, StraightLine) {
  const auto s = integrate_pose({{0, 0}, 0.0, 1.0, 0.0}, 1.0);
  EXPECT_DOUBLE_EQ(s.position.x, 1.0);
  EXPECT_DOUBLE_EQ(s.position.y, 0.0);
  EXPECT_DOUBLE_EQ(s.heading, 0.0);
}

TEST(Integrate, PureRotation) {
  const auto s = integrate_pose({{0, 0}, 0.0, 0.0, 90.0}, 1.0);
  EXPECT_EQ(s.position, (Vec2{0, 0}));
  EXPECT_DOUBLE_EQ(s.heading, 90.0);
}

TEST(Integrate, RotateThenTranslate) {
  const auto s = integrate_pose({{0, 0}, 0.0, 1.0, 90.0}, 0.5);
  EXPECT_DOUBLE_EQ(s.heading, 45.0);
  EXPECT_NEAR(s.position.x, 0.5 * std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(s.position.y, 0.5 * std::sqrt(0.5), 1e-12);
}

TEST(Integrate, HeadingStaysInRange) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> w(-90, 90), v(-5, 5);
  AvatarState s;
  for (int i = 0; i < 100000; ++i) {
    s.w = w(rng);
    s.v = v(rng);
    s = integrate_pose(s, 0.01);
    ASSERT_GE(s.heading, 0.0);
    ASSERT_LT(s.heading, 360.0);
  }
  EXPECT_EQ(wrap_heading(-1e-18), 0.0);
  EXPECT_EQ(wrap_heading(720.0), 0.0);
  EXPECT_EQ(wrap_signed(180.0), -180.0);
  EXPECT_EQ(wrap_signed(-190.0), 170.0);
}

TEST(Integrate, PathLengthConsistency) {
  AvatarState s{{0, 0}, 30.0, 2.5, 0.0};
  const Vec2 start = s.position;
  for (int i = 0; i < 10000; ++i) s = integrate_pose(s, 0.01);
  EXPECT_NEAR(distance(s.position, start), 2.5 * 100.0, 1e-9 * 10000);
}

TEST(Integrate, NoLateralMotion) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> w(-90, 90), v(-5, 5);
  AvatarState s;
  for (int i = 0; i < 10000; ++i) {
    s.w = w(rng);
    s.v = v(rng);
    const auto next = integrate_pose(s, 0.01);
    const double rad = next.heading * M_PI / 180.0;
    const Vec2 d = next.position - s.position;
    // Displacement is parallel to the new heading.
    ASSERT_NEAR(d.x * std::sin(rad) - d.y * std::cos(rad), 0.0, 1e-12);
    s = next;
  }
}

TEST(Integrate, Deterministic) {
  std::vector<std::pair<double, double>> inputs;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 5000; ++i) inputs.emplace_back(5 * u(rng), 90 * u(rng));
  auto run = [&] {
    AvatarState s;
    std::vector<AvatarState> trace;
    for (auto [v, w] : inputs) {
      s.v = v;
      s.w = w;
      s = integrate_pose(s, 0.01);
      trace.push_back(s);
    }
    return trace;
  };
  EXPECT_EQ(run(), run());
}

TEST(Collision, NoWallsIsIdentity) {
  const AvatarState s{{3, 4}, 10.0, 2.0, 5.0};
  EXPECT_EQ(resolve_collision(s, {}), s);
}

TEST(Collision, PushedOutAlongNormalTangentialKept) {
  // Long horizontal wall at y = 0; avatar 0.3 m below it (y down), heading
  // 0 moves parallel to the wall.
  const std::vector<Segment> walls{{{-1000, 0}, {1000, 0}}};
  const AvatarState s{{5, 0.3}, 0.0, 2.0, 0.0};
  const auto r = resolve_collision(s, walls);
  EXPECT_NEAR(r.position.y, 0.4, 1e-12);
  EXPECT_NEAR(r.position.x, 5.0, 1e-12);
  EXPECT_DOUBLE_EQ(r.v, 2.0);
}

TEST(Collision, HeadOnStops) {
  const std::vector<Segment> walls{{{10, -50}, {10, 50}}};
  const AvatarState s{{9.7, 0}, 0.0, 2.0, 0.0};
  const auto r = resolve_collision(s, walls);
  EXPECT_NEAR(r.position.x, 9.6, 1e-12);
  EXPECT_NEAR(r.v, 0.0, 1e-12);
}

TEST(Collision, MovingAwayKeepsSpeed) {
  const std::vector<Segment> walls{{{10, -50}, {10, 50}}};
  const AvatarState s{{9.7, 0}, 180.0, 2.0, 0.0};
  const auto r = resolve_collision(s, walls);
  EXPECT_NEAR(r.position.x, 9.6, 1e-12);
  EXPECT_DOUBLE_EQ(r.v, 2.0);
}

TEST(Collision, NeverIncreasesSpeed) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  const std::vector<Segment> walls{{{0, 0}, {10, 0}}, {{10, 0}, {10, 10}}, {{0, 5}, {4, 9}}};
  for (int i = 0; i < 20000; ++i) {
    AvatarState s{{5 + 6 * u(rng), 5 + 6 * u(rng)}, 180 + 180 * u(rng), 5 * u(rng), 0.0};
    s.heading = wrap_heading(s.heading);
    const auto r = resolve_collision(s, walls);
    ASSERT_LE(std::abs(r.v), std::abs(s.v) + 1e-15);
    ASSERT_TRUE(std::isfinite(r.position.x) && std::isfinite(r.position.y));
  }
}

TEST(Teleport, ResetsVelocities) {
  const AvatarState s{{3, 4}, 10.0, 2.0, 5.0};
  const auto a = teleport(s, {{0, 0}, 0.0});
  EXPECT_EQ(a, (AvatarState{{0, 0}, 0.0, 0.0, 0.0}));
  const auto b = teleport(s, s.pose());
  EXPECT_EQ(b.pose(), s.pose());
  EXPECT_EQ(b.v, 0.0);
  EXPECT_EQ(b.w, 0.0);
  const auto c = teleport(teleport(s, {{1, 1}, 90.0}), {{2, 2}, 180.0});
  EXPECT_EQ(c.pose(), (Pose{{2, 2}, 180.0}));
}
