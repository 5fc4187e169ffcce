#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>

#include "loco/error.hpp"
#include "loco/headless.hpp"
#include "loco/task_engine.hpp"

using namespace loco;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no loco::Error thrown";
  return ErrorKind::InvalidState;
}

// One goal 10 m east of the start.
CityMap one_goal_map() {
  CityMap m;
  m.start = {{0, 0}, 0.0};
  GoalZone g;
  g.id = "cafe";
  g.display_name = "Cafe";
  g.center = {10, 0};
  m.goals.push_back(g);
  m.guidance["cafe"] = {{0, 0}, {10, 0}};
  validate_map(m);
  return m;
}

SessionOptions single_trial() {
  SessionOptions o;
  o.trials = 1;
  return o;
}

AvatarState at(Vec2 p, double v = 0.0) { return {p, 0.0, v, 0.0}; }

template <typename E>
int count(const std::vector<SessionEvent>& events) {
  return static_cast<int>(std::count_if(events.begin(), events.end(),
                                        [](const auto& e) { return std::holds_alternative<E>(e); }));
}

std::string temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("loco_test_" + name);
  std::filesystem::remove_all(p);
  return p.string();
}

}  // namespace

TEST(Map, DefaultCity) {
  const auto m = default_city_map();
  ASSERT_EQ(m.goals.size(), 6u);
  for (const auto& g : m.goals) {
    const double len = m.guidance_length_m.at(g.id);
    EXPECT_GE(len, 300.0) << g.id;
    EXPECT_LE(len, 550.0) << g.id;
    EXPECT_EQ(g.radius, 2.0);
    EXPECT_EQ(g.dwell_required, 2.0);
    // Optimal traversal at full speed stays inside the formative window.
    EXPECT_GE(len / 5.0, 60.0);
    EXPECT_LE(len / 5.0, 110.0);
  }
  EXPECT_EQ(m.goal("pizzeria").display_name, "Pizzeria");
}

TEST(Map, GuidanceStaysOnStreets) {
  // Every guidance vertex lies at least one avatar radius from every wall.
  const auto m = default_city_map();
  for (const auto& [id, path] : m.guidance) {
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      for (int k = 0; k <= 100; ++k) {
        const Vec2 p = path[i] + (k / 100.0) * (path[i + 1] - path[i]);
        for (const auto& w : m.walls)
          ASSERT_GT(distance(closest_point(w, p), p), kDefaultAvatarRadius) << id;
      }
    }
  }
}

TEST(Map, JsonRoundTripAndBundledFile) {
  const auto m = default_city_map();
  const auto back = parse_map(map_to_json(m));
  EXPECT_EQ(back.start, m.start);
  EXPECT_EQ(back.walls, m.walls);
  EXPECT_EQ(back.guidance, m.guidance);
  ASSERT_EQ(back.goals.size(), m.goals.size());
  const auto bundled = load_map(LOCO_DATA_DIR "/default_map.json");
  EXPECT_EQ(map_to_json(bundled), map_to_json(m));
}

TEST(Map, ValidationErrors) {
  EXPECT_EQ(kind_of([] { parse_map("{not json"); }), ErrorKind::Parse);
  EXPECT_EQ(kind_of([] { parse_map(R"({"start":{"x":0,"y":0,"heading":0},"goals":[],"walls":[],"guidance":{}})"); }),
            ErrorKind::Validation);
  try {
    parse_map(R"({"start":{"x":0,"y":0,"heading":0},
                  "goals":[{"id":"dock","name":"Dock","center":[10,0],"radius":2}],
                  "walls":[],"guidance":{}})");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Validation);
    EXPECT_NE(std::string(e.what()).find("dock"), std::string::npos);
  }
  // Polyline ends outside the zone.
  EXPECT_EQ(kind_of([] {
              parse_map(R"({"start":{"x":0,"y":0,"heading":0},
                  "goals":[{"id":"dock","name":"Dock","center":[10,0],"radius":2}],
                  "walls":[],"guidance":{"dock":[[0,0],[5,0]]}})");
            }),
            ErrorKind::Validation);
  EXPECT_EQ(kind_of([] { load_map("/nonexistent/map.json"); }), ErrorKind::FileNotFound);
}

TEST(Session, SeedDeterministicPermutation) {
  const auto m = default_city_map();
  const auto a = make_session(m, "P01", Condition::Scooter, 42).trial_order();
  const auto b = make_session(m, "P01", Condition::Scooter, 42).trial_order();
  EXPECT_EQ(a, b);
  ASSERT_EQ(a.size(), 6u);
  EXPECT_EQ(std::set<std::string>(a.begin(), a.end()).size(), 6u);
  int differing = 0;
  for (std::uint64_t s = 0; s < 20; ++s)
    differing += make_session(m, "P01", Condition::Scooter, s).trial_order() != a;
  EXPECT_GE(differing, 15);
}

TEST(Session, PermutationIsUniformish) {
  // Each goal lands in each slot about n/6 times.
  std::map<std::pair<std::size_t, std::size_t>, int> hits;
  const int n = 6000;
  for (int s = 0; s < n; ++s) {
    const auto p = seeded_permutation(6, static_cast<std::uint64_t>(s));
    for (std::size_t i = 0; i < 6; ++i) ++hits[{i, p[i]}];
  }
  for (const auto& [k, c] : hits) EXPECT_NEAR(c, n / 6.0, 150.0);
}

TEST(Dwell, TwoSecondsStationaryCompletes) {
  const auto m = one_goal_map();
  Session s(m, "P01", Condition::Scooter, 1, single_trial());
  for (int i = 0; i < 50; ++i) ASSERT_TRUE(s.tick(at({0, 0}), 0.01).size() <= 1);
  std::vector<SessionEvent> all;
  for (int i = 0; i < 199; ++i) {
    auto ev = s.tick(at({10.5, 0}), 0.01);
    ASSERT_EQ(count<event::TrialComplete>(ev), 0) << "tick " << i;
    all.insert(all.end(), ev.begin(), ev.end());
  }
  EXPECT_EQ(count<event::DwellStarted>(all), 1);
  EXPECT_EQ(s.phase(), TrialPhase::Dwelling);
  EXPECT_NEAR(s.dwell_elapsed(), 1.99, 1e-12);
  const auto last = s.tick(at({10.5, 0}), 0.01);
  ASSERT_EQ(count<event::TrialComplete>(last), 1);
  ASSERT_EQ(count<event::Teleport>(last), 1);
  ASSERT_EQ(count<event::SessionComplete>(last), 1);
  const auto& log = std::get<event::TrialComplete>(last[0]).log;
  EXPECT_NEAR(log.completion_time_s, 2.5, 1e-12);
  EXPECT_EQ(std::get<event::Teleport>(last[1]).pose, m.start);
  EXPECT_TRUE(s.finished());
}

TEST(Dwell, OneNinetyNineThenLeaveResets) {
  const auto m = one_goal_map();
  Session s(m, "P01", Condition::Scooter, 1, single_trial());
  for (int i = 0; i < 199; ++i) ASSERT_EQ(count<event::TrialComplete>(s.tick(at({10, 1}), 0.01)), 0);
  const auto ev = s.tick(at({13, 0}), 0.01);
  EXPECT_EQ(count<event::DwellReset>(ev), 1);
  EXPECT_EQ(s.phase(), TrialPhase::Navigating);
  EXPECT_EQ(s.dwell_elapsed(), 0.0);
  // Back in the zone: the count starts over.
  for (int i = 0; i < 199; ++i) ASSERT_EQ(count<event::TrialComplete>(s.tick(at({10, 1}), 0.01)), 0);
  EXPECT_EQ(count<event::TrialComplete>(s.tick(at({10, 1}), 0.01)), 1);
}

TEST(Dwell, MovingInZoneNeverDwells) {
  const auto m = one_goal_map();
  Session s(m, "P01", Condition::Scooter, 1, single_trial());
  for (int i = 0; i < 300; ++i) {
    const auto ev = s.tick(at({9, 0}, 0.2), 0.01);
    ASSERT_EQ(count<event::DwellStarted>(ev), 0);
  }
  EXPECT_NE(s.phase(), TrialPhase::Dwelling);
  // Backward creep counts as moving too.
  for (int i = 0; i < 300; ++i) s.tick(at({9, 0}, -0.06), 0.01);
  EXPECT_FALSE(s.finished());
}

TEST(Dwell, EdgeOfZoneAndEpsilon) {
  const auto m = one_goal_map();
  Session s(m, "P01", Condition::Scooter, 1, single_trial());
  s.tick(at({12.0, 0}, 0.049), 0.01);  // on the boundary, under eps
  EXPECT_EQ(s.phase(), TrialPhase::Dwelling);
  s.tick(at({12.0, 0}, 0.05), 0.01);  // eps itself is not stationary
  EXPECT_EQ(s.phase(), TrialPhase::Navigating);
}

TEST(Dwell, TickAfterCompleteWarns) {
  const auto m = one_goal_map();
  Session s(m, "P01", Condition::Scooter, 1, single_trial());
  while (!s.finished()) s.tick(at({10, 0}), 0.01);
  const auto ev = s.tick(at({10, 0}), 0.01);
  ASSERT_EQ(ev.size(), 1u);
  EXPECT_TRUE(std::holds_alternative<event::Warning>(ev[0]));
  EXPECT_EQ(s.logs().size(), 1u);
}

TEST(Session, PromptAndSampling) {
  const auto m = default_city_map();
  Session s(m, "P03", Condition::Joystick, 5);
  const auto first = s.tick(at({0, 0}), 0.01);
  ASSERT_FALSE(first.empty());
  const auto& started = std::get<event::TrialStarted>(first[0]);
  EXPECT_EQ(started.prompt, "Please go to '" + m.goal(started.goal_id).display_name + "'");
  for (int i = 0; i < 99; ++i) s.tick(at({0, 0}), 0.01);
  auto ev = s.abort(at({1, 0}));
  const auto& log = std::get<event::TrialComplete>(ev[0]).log;
  EXPECT_TRUE(log.aborted);
  EXPECT_EQ(event_kind(ev[0]), "trial_aborted");
  // 10 Hz: samples at 0, 0.1, ..., 1.0 plus the closing sample.
  ASSERT_EQ(log.trace.size(), 12u);
  for (std::size_t i = 1; i < log.trace.size(); ++i) EXPECT_GE(log.trace[i].t, log.trace[i - 1].t);
  EXPECT_NEAR(log.trace[5].t, 0.5, 1e-12);
}

TEST(Session, ExactlyOneActiveGoalNeverRevisited) {
  const auto m = default_city_map();
  Session s(m, "P01", Condition::Scooter, 9);
  std::vector<std::string> seen;
  while (!s.finished()) {
    const auto* g = s.active_goal();
    ASSERT_NE(g, nullptr);
    if (seen.empty() || seen.back() != g->id) {
      ASSERT_EQ(std::find(seen.begin(), seen.end(), g->id), seen.end());
      seen.push_back(g->id);
    }
    s.tick(at(g->center), 0.01);
  }
  EXPECT_EQ(seen, s.trial_order());
  EXPECT_EQ(s.active_goal(), nullptr);
}

TEST(Counterbalance, HalfStartEachWay) {
  for (std::size_t n : {2u, 13u, 14u, 30u}) {
    const auto orders = counterbalanced_orders(n, 77);
    std::size_t scooter_first = 0;
    for (const auto& o : orders) {
      EXPECT_NE(o[0], o[1]);
      scooter_first += o[0] == Condition::Scooter;
    }
    EXPECT_TRUE(scooter_first == n / 2 || scooter_first == (n + 1) / 2) << n;
  }
}

TEST(TrialLogs, JsonAndCsv) {
  TrialLog log{"P07", Condition::Joystick, "harbor", 3, 12.5, 101.25, 88.75, false,
               {{12.5, 0, 0, 0}, {12.6, 0.1, 0.0, 359.5}}};
  const auto back = trial_log_from_json(trial_log_to_json(log));
  EXPECT_EQ(back, log);

  TrialLog aborted = log;
  aborted.aborted = true;
  aborted.goal_id = "park";
  const std::vector<TrialLog> logs{log, aborted};
  EXPECT_EQ(summary_csv(logs), "participant,condition,goal,completion_s\nP07,joystick,harbor,88.75\n");

  const auto dir = temp_dir("logs");
  write_trial_logs(dir, logs);
  EXPECT_EQ(read_trial_logs(dir), logs);
  EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(dir) / "summary.csv"));
  EXPECT_EQ(kind_of([] { trial_log_from_json("{\"participant\":1}"); }), ErrorKind::Parse);
}

TEST(Pilot, AlignedAndTurning) {
  const auto m = one_goal_map();
  const auto& goal = m.goals[0];
  MotionParams p;
  const std::vector<Vec2> path{{0, 0}, {100, 0}};
  GoalZone far = goal;
  far.center = {100, 0};
  auto cmd = scripted_pilot(at({0, 0}), path, far, p, {}, InputSource::Scooter);
  EXPECT_EQ(cmd.yaw_input, 0.0);
  EXPECT_EQ(cmd.slide_input, 1.0);

  // Heading 0 (east), path straight up the screen (negative y) -> left turn.
  const std::vector<Vec2> up{{0, 0}, {0, -100}};
  cmd = scripted_pilot(at({0, 0}), up, far, p, {}, InputSource::Scooter);
  EXPECT_EQ(cmd.yaw_input, -1.0);
  EXPECT_LT(cmd.slide_input, 1.0);
  EXPECT_GE(cmd.slide_input, 0.2);

  // Inside the zone: stop sliding.
  cmd = scripted_pilot(at({10, 0.5}), m.guidance.at("cafe"), goal, p, {}, InputSource::Scooter);
  EXPECT_EQ(cmd.slide_input, 0.0);
}

TEST(Pilot, PizzeriaWithinFormativeWindow) {
  RunOptions opts;
  opts.session.fixed_order = {"pizzeria"};
  const auto r = run_pilot_session(default_city_map(), {}, opts);
  ASSERT_TRUE(r.completed);
  ASSERT_EQ(r.logs.size(), 1u);
  EXPECT_GE(r.logs[0].completion_time_s, 60.0);
  EXPECT_LE(r.logs[0].completion_time_s, 120.0);
}

TEST(Cohort, BookkeepingSmall) {
  const auto c = simulate_cohort(default_city_map(), {}, 4, 3);
  ASSERT_EQ(c.logs.size(), 48u);
  std::map<std::string, int> per;
  for (const auto& l : c.logs) ++per[l.participant_id];
  EXPECT_EQ(per.size(), 4u);
  for (const auto& [id, n] : per) EXPECT_EQ(n, 12) << id;
}
