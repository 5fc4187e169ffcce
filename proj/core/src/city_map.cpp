#include <algorithm>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "loco/error.hpp"
#include "loco/task_engine.hpp"
#include "text_util.hpp"

namespace loco {

using nlohmann::ordered_json;

namespace {

constexpr double kStartTolerance = 1e-6;

Vec2 read_point(const ordered_json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw Error(ErrorKind::Parse, what + ": expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

ordered_json write_point(Vec2 p) { return ordered_json::array({p.x, p.y}); }

}  // namespace

const GoalZone& CityMap::goal(std::string_view id) const {
  for (const auto& g : goals)
    if (g.id == id) return g;
  throw Error(ErrorKind::Validation, "unknown goal '" + std::string(id) + "'");
}

const std::vector<Vec2>& CityMap::path_to(std::string_view id) const {
  auto it = guidance.find(std::string(id));
  if (it == guidance.end())
    throw Error(ErrorKind::Validation, "goal '" + std::string(id) + "' has no guidance polyline");
  return it->second;
}

double polyline_length(std::span<const Vec2> path) noexcept {
  double total = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) total += distance(path[i - 1], path[i]);
  return total;
}

void validate_map(CityMap& map) {
  if (map.goals.empty()) throw Error(ErrorKind::Validation, "map has no goals");
  if (!std::isfinite(map.start.position.x) || !std::isfinite(map.start.position.y) ||
      !std::isfinite(map.start.heading))
    throw Error(ErrorKind::Validation, "start pose must be finite");
  std::set<std::string> ids;
  map.guidance_length_m.clear();
  for (const auto& g : map.goals) {
    const auto name = "goal '" + g.id + "'";
    if (g.id.empty()) throw Error(ErrorKind::Validation, "goal with empty id");
    if (!ids.insert(g.id).second) throw Error(ErrorKind::Validation, name + " is duplicated");
    if (!(g.radius > 0.0)) throw Error(ErrorKind::Validation, name + ": radius must be > 0");
    if (g.dwell_required != kDwellRequiredSeconds)
      throw Error(ErrorKind::Validation, name + ": dwell_required must be 2.0 s");
    auto it = map.guidance.find(g.id);
    if (it == map.guidance.end())
      throw Error(ErrorKind::Validation, name + " has no guidance polyline");
    const auto& path = it->second;
    if (path.size() < 2)
      throw Error(ErrorKind::Validation, name + ": guidance polyline needs at least 2 points");
    if (distance(path.front(), map.start.position) > kStartTolerance)
      throw Error(ErrorKind::Validation, name + ": guidance polyline does not begin at start");
    if (!g.contains(path.back()))
      throw Error(ErrorKind::Validation, name + ": guidance polyline does not end inside the zone");
    map.guidance_length_m[g.id] = polyline_length(path);
  }
  for (const auto& [id, path] : map.guidance)
    if (!ids.contains(id))
      throw Error(ErrorKind::Validation, "guidance polyline for unknown goal '" + id + "'");
}

CityMap parse_map(std::string_view document) {
  ordered_json j;
  try {
    j = ordered_json::parse(document);
  } catch (const ordered_json::parse_error& e) {
    throw Error(ErrorKind::Parse, std::string("map document: ") + e.what());
  }
  CityMap map;
  try {
    if (!j.is_object()) throw Error(ErrorKind::Parse, "map document must be an object");
    const auto& s = j.at("start");
    map.start.position = {s.at("x").get<double>(), s.at("y").get<double>()};
    map.start.heading = s.value("heading", 0.0);

    for (const auto& g : j.at("goals")) {
      GoalZone zone;
      zone.id = g.at("id").get<std::string>();
      zone.display_name = g.value("name", zone.id);
      zone.center = read_point(g.at("center"), "goal '" + zone.id + "' center");
      zone.radius = g.value("radius", kDefaultGoalRadius);
      map.goals.push_back(std::move(zone));
    }
    if (j.contains("walls")) {
      for (const auto& w : j.at("walls"))
        map.walls.push_back({read_point(w.at("a"), "wall a"), read_point(w.at("b"), "wall b")});
    }
    if (j.contains("guidance")) {
      for (const auto& [id, pts] : j.at("guidance").items()) {
        std::vector<Vec2> path;
        for (const auto& p : pts) path.push_back(read_point(p, "guidance '" + id + "'"));
        map.guidance.emplace(id, std::move(path));
      }
    }
  } catch (const ordered_json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("map document: ") + e.what());
  }
  validate_map(map);
  return map;
}

CityMap load_map(const std::filesystem::path& path) { return parse_map(detail::read_file(path)); }

std::string map_to_json(const CityMap& map) {
  ordered_json j;
  j["start"] = {{"x", map.start.position.x},
                {"y", map.start.position.y},
                {"heading", map.start.heading}};
  j["goals"] = ordered_json::array();
  for (const auto& g : map.goals)
    j["goals"].push_back(
        {{"id", g.id}, {"name", g.display_name}, {"center", write_point(g.center)}, {"radius", g.radius}});
  j["walls"] = ordered_json::array();
  for (const auto& w : map.walls) j["walls"].push_back({{"a", write_point(w.a)}, {"b", write_point(w.b)}});
  j["guidance"] = ordered_json::object();
  for (const auto& g : map.goals) {
    auto arr = ordered_json::array();
    for (auto p : map.guidance.at(g.id)) arr.push_back(write_point(p));
    j["guidance"][g.id] = std::move(arr);
  }
  return j.dump(1) + "\n";
}

CityMap default_city_map() {
  constexpr double kBlock = 100.0;
  constexpr double kHalfStreet = 10.0;
  constexpr int kLo = -3;
  constexpr int kHi = 4;

  CityMap map;
  map.start = {{0.0, 0.0}, 0.0};

  // Buildings fill every block between street centerlines.
  for (int i = kLo; i < kHi; ++i) {
    for (int k = kLo; k < kHi; ++k) {
      const double x0 = i * kBlock + kHalfStreet, x1 = (i + 1) * kBlock - kHalfStreet;
      const double y0 = k * kBlock + kHalfStreet, y1 = (k + 1) * kBlock - kHalfStreet;
      map.walls.push_back({{x0, y0}, {x1, y0}});
      map.walls.push_back({{x1, y0}, {x1, y1}});
      map.walls.push_back({{x1, y1}, {x0, y1}});
      map.walls.push_back({{x0, y1}, {x0, y0}});
    }
  }
  // City boundary.
  const double lo = kLo * kBlock - kHalfStreet, hi = kHi * kBlock + kHalfStreet;
  map.walls.push_back({{lo, lo}, {hi, lo}});
  map.walls.push_back({{hi, lo}, {hi, hi}});
  map.walls.push_back({{hi, hi}, {lo, hi}});
  map.walls.push_back({{lo, hi}, {lo, lo}});

  auto add = [&](std::string id, std::string name, std::vector<Vec2> route) {
    GoalZone g;
    g.id = id;
    g.display_name = std::move(name);
    g.center = route.back();
    map.goals.push_back(g);
    map.guidance.emplace(std::move(id), std::move(route));
  };
  add("pizzeria", "Pizzeria", {{0, 0}, {300, 0}, {300, 60}});
  add("library", "Library", {{0, 0}, {0, -200}, {-200, -200}});
  add("museum", "Museum", {{0, 0}, {0, 100}, {-200, 100}, {-200, 250}});
  add("station", "Station", {{0, 0}, {200, 0}, {200, 200}, {150, 200}});
  add("park", "Park", {{0, 0}, {0, 300}, {80, 300}});
  add("harbor", "Harbor", {{0, 0}, {100, 0}, {100, -300}, {180, -300}});

  validate_map(map);
  return map;
}

}  // namespace loco
