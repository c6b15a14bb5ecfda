#include "sefm/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "dsl.hpp"

namespace sefm {

namespace {

constexpr int kMaxRejectionTries = 20000;

// Deterministic approach offsets used when placing an object next to another.
const double kPlaceOffsets[][2] = {
    {0.3, 0.0}, {0.0, 0.3}, {-0.3, 0.0}, {0.0, -0.3},
    {0.21, 0.21}, {-0.21, 0.21}, {0.21, -0.21}, {-0.21, -0.21},
};

}  // namespace

bool WorldMap::in_free_space(const Vec2& p) const {
  if (!bounds.contains(p)) return false;
  for (const auto& ob : obstacles)
    if (ob.contains(p)) return false;
  return true;
}

const Room* WorldMap::room_at(const Vec2& p) const {
  for (const auto& room : rooms)
    if (room.rect.contains(p)) return &room;
  return nullptr;
}

const Room* WorldMap::find_room(const std::string& name) const {
  for (const auto& room : rooms)
    if (room.name == name) return &room;
  return nullptr;
}

std::vector<std::string> WorldMap::prior_rooms(const std::string& object_class) const {
  std::vector<std::string> out;
  auto it = priors.find(object_class);
  if (it == priors.end()) return out;
  for (const auto& rp : it->second)
    if (rp.mass > 0.0) out.push_back(rp.room);
  return out;
}

World::World(WorldMap map, std::vector<GroundTruthObject> objects, RobotState robot,
             SensorModel sensor, std::uint64_t seed)
    : map_(std::move(map)),
      objects_(std::move(objects)),
      robot_(std::move(robot)),
      sensor_(sensor),
      rng_(derive_seed(seed, "world")) {}

double World::primitive_success(const std::string& action) const {
  auto it = primitive_success_.find(action);
  return it == primitive_success_.end() ? 1.0 : it->second;
}

void World::set_primitive_success(const std::string& action, double p) {
  primitive_success_[action] = p;
}

const GroundTruthObject* World::nearest_object(const std::string& object_class,
                                               const Vec2& from) const {
  const GroundTruthObject* best = nullptr;
  double best_d = std::numeric_limits<double>::max();
  for (const auto& obj : objects_) {
    if (obj.object_class != object_class) continue;
    const double d = distance(obj.position, from);
    if (d < best_d) {
      best_d = d;
      best = &obj;
    }
  }
  return best;
}

void World::put_in_gripper(const std::string& object_class) {
  remove_object(object_class, robot_.pose.position());
  robot_.gripper = object_class;
}

void World::remove_object(const std::string& object_class, const Vec2& near) {
  const GroundTruthObject* target = nearest_object(object_class, near);
  if (target == nullptr) return;
  for (auto it = objects_.begin(); it != objects_.end(); ++it) {
    if (&*it == target) {
      objects_.erase(it);
      return;
    }
  }
}

void World::place_object(const std::string& object_class, const Vec2& at,
                         std::set<std::string> flags) {
  Vec2 pos = at;
  if (!map_.in_free_space(pos)) {
    for (const auto& off : kPlaceOffsets) {
      const Vec2 candidate{at.x + off[0], at.y + off[1]};
      if (map_.in_free_space(candidate)) {
        pos = candidate;
        break;
      }
    }
    if (!map_.in_free_space(pos)) pos = map_.bounds.clamp(at);
  }
  objects_.push_back(GroundTruthObject{object_class, pos, std::move(flags)});
}

void World::flag_object(const std::string& object_class, const Vec2& near,
                        const std::string& flag) {
  const GroundTruthObject* target = nearest_object(object_class, near);
  if (target == nullptr) return;
  for (auto& obj : objects_) {
    if (&obj == target) {
      obj.flags.insert(flag);
      return;
    }
  }
}

// --- scenario parsing ------------------------------------------------------

World load_scenario(const std::string& source_text, std::uint64_t seed) {
  using dsl::Line;
  using dsl::require_identifier;
  using dsl::require_number;
  using dsl::syntax_error;

  WorldMap map;
  std::vector<GroundTruthObject> objects;
  SensorModel sensor;
  RobotState robot;
  bool saw_bounds = false;
  bool saw_robot = false;
  bool pose_level = false;
  std::optional<std::string> holding;
  std::map<std::string, double> success;
  std::vector<std::pair<Line, int>> deferred_priors;  // validated after map block

  auto read_rect = [&](const Line& line, int first) {
    Rect r;
    r.lo.x = require_number(line, first, "coordinate");
    r.lo.y = require_number(line, first + 1, "coordinate");
    r.hi.x = require_number(line, first + 2, "coordinate");
    r.hi.y = require_number(line, first + 3, "coordinate");
    if (!r.valid()) syntax_error(line, first, "rectangle has negative extent");
    return r;
  };

  const auto lines = dsl::tokenize_lines(source_text);
  std::size_t i = 0;
  while (i < lines.size()) {
    const Line& line = lines[i];
    const std::string& key = line.tokens[0];
    if (key == "map") {
      ++i;
      bool closed = false;
      while (i < lines.size()) {
        const Line& ml = lines[i];
        const std::string& mkey = ml.tokens[0];
        if (mkey == "end") {
          closed = true;
          ++i;
          break;
        }
        if (mkey == "bounds") {
          map.bounds = read_rect(ml, 1);
          saw_bounds = true;
        } else if (mkey == "room") {
          Room room;
          room.name = require_identifier(ml, 1, "room name");
          room.rect = read_rect(ml, 2);
          if (map.find_room(room.name) != nullptr)
            syntax_error(ml, 1, "duplicate room '" + room.name + "'");
          map.rooms.push_back(std::move(room));
        } else if (mkey == "obstacle") {
          map.obstacles.push_back(read_rect(ml, 1));
        } else if (mkey == "sensor") {
          if (ml.tokens.size() % 2 == 0)
            syntax_error(ml, static_cast<int>(ml.tokens.size() - 1),
                         "sensor key without value");
          for (std::size_t k = 1; k + 1 < ml.tokens.size(); k += 2) {
            const std::string& skey = ml.tokens[k];
            const double v = require_number(ml, static_cast<int>(k + 1), "sensor value");
            if (skey == "range") sensor.range = v;
            else if (skey == "fov") sensor.fov = v;
            else if (skey == "sigma") sensor.sigma_z = v;
            else if (skey == "miss") sensor.miss_rate = v;
            else syntax_error(ml, static_cast<int>(k), "unknown sensor key '" + skey + "'");
          }
        } else {
          syntax_error(ml, 0, "unknown map key '" + mkey + "'");
        }
        ++i;
      }
      if (!closed) syntax_error(line, 0, "map block is missing 'end'");
    } else if (key == "prior") {
      require_identifier(line, 1, "object class");
      require_identifier(line, 2, "room name");
      require_number(line, 3, "prior mass");
      deferred_priors.emplace_back(line, 0);
      ++i;
    } else if (key == "object") {
      GroundTruthObject obj;
      obj.object_class = require_identifier(line, 1, "object class");
      obj.position.x = require_number(line, 2, "coordinate");
      obj.position.y = require_number(line, 3, "coordinate");
      for (std::size_t k = 4; k < line.tokens.size(); ++k)
        obj.flags.insert(require_identifier(line, static_cast<int>(k), "flag"));
      objects.push_back(std::move(obj));
      ++i;
    } else if (key == "robot") {
      if (saw_robot) syntax_error(line, 0, "duplicate robot line");
      saw_robot = true;
      robot.pose.x = require_number(line, 1, "coordinate");
      robot.pose.y = require_number(line, 2, "coordinate");
      robot.pose.heading = require_number(line, 3, "heading");
      if (line.tokens.size() > 4) {
        if (line.tokens[4] != "holding") syntax_error(line, 4, "expected 'holding'");
        holding = require_identifier(line, 5, "object class");
        if (line.tokens.size() > 6) syntax_error(line, 6, "unexpected token");
      }
      ++i;
    } else if (key == "success") {
      const std::string action = require_identifier(line, 1, "action name");
      const double p = require_number(line, 2, "probability");
      if (p < 0.0 || p > 1.0) syntax_error(line, 2, "probability out of [0,1]");
      success[action] = p;
      ++i;
    } else if (key == "pose_level") {
      if (line.tokens.size() != 2 || (line.tokens[1] != "on" && line.tokens[1] != "off"))
        syntax_error(line, 1, "pose_level must be 'on' or 'off'");
      pose_level = line.tokens[1] == "on";
      ++i;
    } else {
      syntax_error(line, 0, "unknown key '" + key + "'");
    }
  }

  if (!saw_bounds) throw Error(errkind::kSyntax, "scenario has no map bounds");

  for (const auto& room : map.rooms) {
    if (!map.bounds.contains(room.rect))
      throw Error(errkind::kGeometry, "room '" + room.name + "' extends beyond map bounds");
  }
  for (const auto& ob : map.obstacles) {
    if (!map.bounds.contains(ob))
      throw Error(errkind::kGeometry, "obstacle extends beyond map bounds");
  }
  for (auto& [line, unused] : deferred_priors) {
    const std::string cls = line.tokens[1];
    const std::string room = line.tokens[2];
    const double mass = dsl::require_number(line, 3, "prior mass");
    if (map.find_room(room) == nullptr)
      dsl::syntax_error(line, 2, "prior references unknown room '" + room + "'");
    if (mass < 0.0 || mass > 1.0) dsl::syntax_error(line, 3, "prior mass out of [0,1]");
    map.priors[cls].push_back(RoomPrior{room, mass});
  }
  for (const auto& [cls, rooms] : map.priors) {
    double total = 0.0;
    for (const auto& rp : rooms) total += rp.mass;
    if (total > 1.0 + 1e-9)
      throw Error(errkind::kSyntax, "prior masses for '" + cls + "' exceed 1");
  }
  for (const auto& obj : objects) {
    if (!map.bounds.contains(obj.position))
      throw Error(errkind::kGeometry,
                  "object '" + obj.object_class + "' lies outside map bounds");
    if (!map.in_free_space(obj.position))
      throw Error(errkind::kGeometry,
                  "object '" + obj.object_class + "' lies inside an obstacle");
  }
  if (!saw_robot) robot.pose = Pose{map.bounds.center().x, map.bounds.center().y, 0.0};
  if (!map.in_free_space(robot.pose.position()))
    throw Error(errkind::kGeometry, "robot start pose is not in free space");

  World world(std::move(map), std::move(objects), robot, sensor, seed);
  for (const auto& [action, p] : success) world.set_primitive_success(action, p);
  world.set_pose_level(pose_level);
  if (holding.has_value()) world.put_in_gripper(*holding);
  return world;
}

// --- sensing ----------------------------------------------------------------

bool visible_from(const WorldMap& map, const SensorModel& sensor, const Pose& viewpoint,
                  const Vec2& target) {
  const Vec2 vp = viewpoint.position();
  const Vec2 d = target - vp;
  const double dist = d.norm();
  if (dist > sensor.range) return false;
  if (dist > 1e-9) {
    const double bearing = std::atan2(d.y, d.x);
    if (std::abs(wrap_angle(bearing - viewpoint.heading)) > sensor.fov * 0.5) return false;
  }
  for (const auto& ob : map.obstacles)
    if (segment_intersects_rect(vp, target, ob)) return false;
  return true;
}

Observation observe(World& world, const Pose& pose) {
  const SensorModel& sensor = world.sensor();
  Observation obs;
  obs.viewpoint = pose;
  obs.range = sensor.range;
  obs.fov = sensor.fov;
  for (const auto& obj : world.objects()) {
    if (!visible_from(world.map(), sensor, pose, obj.position)) continue;
    if (sensor.miss_rate > 0.0 && world.rng().bernoulli(sensor.miss_rate)) continue;
    const Vec2 reported = sensor.sigma_z > 0.0
                              ? world.rng().normal2(obj.position, sensor.sigma_z)
                              : obj.position;
    const double dist = distance(obj.position, pose.position());
    const double confidence = std::clamp(1.0 - 0.5 * dist / sensor.range, 0.05, 1.0);
    obs.detections.push_back(Detection{obj.object_class, reported, confidence});
  }
  return obs;
}

// --- navigation --------------------------------------------------------------

namespace {

struct Grid {
  const WorldMap* map;
  double res;
  int nx, ny;

  explicit Grid(const WorldMap& m, double resolution)
      : map(&m), res(resolution),
        nx(std::max(1, static_cast<int>(std::ceil(m.bounds.width() / resolution)))),
        ny(std::max(1, static_cast<int>(std::ceil(m.bounds.height() / resolution)))) {}

  Vec2 center(int ix, int iy) const {
    return {map->bounds.lo.x + (ix + 0.5) * res, map->bounds.lo.y + (iy + 0.5) * res};
  }
  std::pair<int, int> cell_of(const Vec2& p) const {
    int ix = static_cast<int>((p.x - map->bounds.lo.x) / res);
    int iy = static_cast<int>((p.y - map->bounds.lo.y) / res);
    return {std::clamp(ix, 0, nx - 1), std::clamp(iy, 0, ny - 1)};
  }
  bool free_cell(int ix, int iy) const {
    if (ix < 0 || iy < 0 || ix >= nx || iy >= ny) return false;
    return map->in_free_space(center(ix, iy));
  }
  int id(int ix, int iy) const { return iy * nx + ix; }
};

bool segment_clear(const WorldMap& map, const Vec2& a, const Vec2& b) {
  for (const auto& ob : map.obstacles)
    if (segment_intersects_rect(a, b, ob)) return false;
  return true;
}

// A* over the 8-connected grid; empty result means unreachable.
std::vector<Vec2> grid_path(const WorldMap& map, double res, const Vec2& from, const Vec2& to) {
  const Grid grid(map, res);
  auto [sx, sy] = grid.cell_of(from);
  auto [tx, ty] = grid.cell_of(to);

  auto nearest_free = [&](int& cx, int& cy) {
    if (grid.free_cell(cx, cy)) return true;
    for (int radius = 1; radius <= 3; ++radius) {
      for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
          if (grid.free_cell(cx + dx, cy + dy)) {
            cx += dx;
            cy += dy;
            return true;
          }
        }
      }
    }
    return false;
  };
  if (!nearest_free(sx, sy) || !nearest_free(tx, ty)) return {};

  const int n = grid.nx * grid.ny;
  std::vector<double> cost(n, std::numeric_limits<double>::max());
  std::vector<int> parent(n, -1);
  struct Node {
    double priority;
    double cost;
    int id;
    bool operator>(const Node& o) const {
      return priority > o.priority || (priority == o.priority && id > o.id);
    }
  };
  std::priority_queue<Node, std::vector<Node>, std::greater<Node>> open;
  auto heuristic = [&](int ix, int iy) {
    const double dx = std::abs(ix - tx), dy = std::abs(iy - ty);
    return grid.res * (std::max(dx, dy) + (std::sqrt(2.0) - 1.0) * std::min(dx, dy));
  };
  const int start = grid.id(sx, sy), goal = grid.id(tx, ty);
  cost[start] = 0.0;
  open.push({heuristic(sx, sy), 0.0, start});
  while (!open.empty()) {
    const Node node = open.top();
    open.pop();
    if (node.cost > cost[node.id]) continue;
    if (node.id == goal) break;
    const int ix = node.id % grid.nx, iy = node.id / grid.nx;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const int jx = ix + dx, jy = iy + dy;
        if (!grid.free_cell(jx, jy)) continue;
        // no corner cutting past a blocked orthogonal neighbor
        if (dx != 0 && dy != 0 && (!grid.free_cell(ix + dx, iy) || !grid.free_cell(ix, iy + dy)))
          continue;
        const double step = (dx != 0 && dy != 0) ? grid.res * std::sqrt(2.0) : grid.res;
        const double next_cost = node.cost + step;
        const int jid = grid.id(jx, jy);
        if (next_cost + 1e-12 < cost[jid]) {
          cost[jid] = next_cost;
          parent[jid] = node.id;
          open.push({next_cost + heuristic(jx, jy), next_cost, jid});
        }
      }
    }
  }
  if (cost[goal] == std::numeric_limits<double>::max()) return {};

  std::vector<Vec2> cells;
  for (int id = goal; id != -1; id = parent[id])
    cells.push_back(grid.center(id % grid.nx, id / grid.nx));
  std::reverse(cells.begin(), cells.end());

  std::vector<Vec2> raw;
  raw.push_back(from);
  for (const auto& c : cells) raw.push_back(c);
  raw.push_back(to);

  // String pulling: hop to the farthest vertex visible in a straight line, so
  // the walked path never detours through the snapped start cell.
  std::vector<Vec2> path;
  path.push_back(raw.front());
  std::size_t i = 0;
  while (i + 1 < raw.size()) {
    std::size_t j = raw.size() - 1;
    while (j > i + 1 && !segment_clear(map, raw[i], raw[j])) --j;
    path.push_back(raw[j]);
    i = j;
  }
  return path;
}

std::vector<Vec2> plan_polyline(const WorldMap& map, double res, const Vec2& from,
                                const Vec2& to) {
  if (!map.in_free_space(to)) return {};
  if (map.in_free_space(from) && segment_clear(map, from, to)) return {from, to};
  return grid_path(map, res, from, to);
}

double polyline_length(const std::vector<Vec2>& path) {
  double len = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) len += distance(path[i - 1], path[i]);
  return len;
}

// Point at arc length s along the polyline.
Vec2 polyline_at(const std::vector<Vec2>& path, double s) {
  for (std::size_t i = 1; i < path.size(); ++i) {
    const double seg = distance(path[i - 1], path[i]);
    if (s <= seg) {
      if (seg < 1e-12) return path[i];
      const double t = s / seg;
      return path[i - 1] + (path[i] - path[i - 1]) * t;
    }
    s -= seg;
  }
  return path.back();
}

}  // namespace

bool path_exists(const WorldMap& map, const Vec2& from, const Vec2& to) {
  return !plan_polyline(map, 0.25, from, to).empty();
}

double path_length(const WorldMap& map, const Vec2& from, const Vec2& to) {
  const auto path = plan_polyline(map, 0.25, from, to);
  if (path.empty()) throw Error(errkind::kUnreachable, "no path to target");
  return polyline_length(path);
}

NavigationResult step_navigate(World& world, const Pose& target) {
  const auto path = plan_polyline(world.map(), world.step_length(),
                                  world.robot().pose.position(), target.position());
  if (path.empty()) throw Error(errkind::kUnreachable, "no path to target pose");
  const double total = polyline_length(path);
  NavigationResult result;
  result.path_length = total;
  const int steps = std::max(1, static_cast<int>(std::ceil(total / world.step_length())));
  for (int s = 1; s <= steps; ++s) {
    const double arc = std::min(total, s * world.step_length());
    const Vec2 prev = world.robot().pose.position();
    const Vec2 next = polyline_at(path, arc);
    double heading = world.robot().pose.heading;
    if (distance(prev, next) > 1e-9) heading = std::atan2(next.y - prev.y, next.x - prev.x);
    if (s == steps) heading = target.heading;
    world.robot().pose = Pose{next.x, next.y, heading};
    result.observations.push_back(observe(world, world.robot().pose));
  }
  return result;
}

bool step_toward(World& world, const Pose& target, Observation& obs, double& moved) {
  const Vec2 at = world.robot().pose.position();
  const auto path = plan_polyline(world.map(), world.step_length(), at, target.position());
  if (path.empty()) throw Error(errkind::kUnreachable, "no path to target pose");
  const double total = polyline_length(path);
  const double arc = std::min(total, world.step_length());
  const Vec2 next = polyline_at(path, arc);
  double heading = world.robot().pose.heading;
  if (distance(at, next) > 1e-9) heading = std::atan2(next.y - at.y, next.x - at.x);
  const bool arrived = total <= world.step_length() + 1e-9;
  if (arrived) heading = target.heading;
  world.robot().pose = Pose{next.x, next.y, heading};
  moved = arc;
  obs = observe(world, world.robot().pose);
  return arrived;
}

// --- primitives ---------------------------------------------------------------

namespace {

// The frame's core object class at the given stage, if any.
std::optional<std::string> core_class_at(const SemanticFrame& frame, int stage) {
  for (const auto& el : frame.elements)
    if (el.role_at(stage) == Role::kCore) return el.object_class;
  return std::nullopt;
}

void apply_world_effects(World& world, const SemanticFrame& frame) {
  RobotState& robot = world.robot();
  for (const auto& effect : frame.postconditions) {
    switch (effect.kind) {
      case EffectKind::kGripperSet: {
        const std::string& cls = effect.args[0];
        if (robot.gripper.has_value() && *robot.gripper != cls)
          world.place_object(*robot.gripper, robot.pose.position());
        world.remove_object(cls, robot.pose.position());
        robot.gripper = cls;
        break;
      }
      case EffectKind::kGripperClear: {
        if (robot.gripper.has_value()) {
          world.place_object(*robot.gripper, robot.pose.position());
          robot.gripper.reset();
        }
        break;
      }
      case EffectKind::kObjectMovedTo: {
        const std::string& cls = effect.args[0];
        const std::string& dest_class = effect.args[1];
        const GroundTruthObject* dest =
            world.nearest_object(dest_class, robot.pose.position());
        const Vec2 anchor =
            dest != nullptr ? dest->position : robot.pose.position();
        if (robot.gripper.has_value() && *robot.gripper == cls) {
          robot.gripper.reset();
        } else {
          world.remove_object(cls, robot.pose.position());
        }
        Vec2 spot = anchor;
        for (const auto& off : kPlaceOffsets) {
          const Vec2 candidate{anchor.x + off[0], anchor.y + off[1]};
          if (world.map().in_free_space(candidate)) {
            spot = candidate;
            break;
          }
        }
        world.place_object(cls, spot);
        break;
      }
      case EffectKind::kObjectStateFlag: {
        world.flag_object(effect.args[0], robot.pose.position(), effect.args[1]);
        break;
      }
    }
  }
  if (!robot.has_executed(frame.id)) robot.executed.push_back(frame.id);
}

}  // namespace

ActionResult execute_primitive(World& world, const std::string& action,
                               const FrameInstance& instance, const FrameLibrary& library) {
  const SemanticFrame& frame = library.frame(instance.frame_id);
  if (std::find(frame.actions.begin(), frame.actions.end(), action) == frame.actions.end())
    throw Error(errkind::kConfig,
                "action '" + action + "' is not part of frame '" + frame.id + "'");
  const auto unmet = next_unmet_precondition(frame, world.robot(), library);
  if (unmet.has_value())
    throw Error(errkind::kPreconditionViolation,
                "frame '" + frame.id + "' requires '" + *unmet + "' first");

  const int stage = stage_of(frame, world.robot(), library);
  const auto core = core_class_at(frame, stage);
  if (core.has_value()) {
    const GroundTruthObject* obj =
        world.nearest_object(*core, world.robot().pose.position());
    if (obj == nullptr)
      throw Error(errkind::kOutOfReach, "no '" + *core + "' present in the world");
    const double d = distance(obj->position, world.robot().pose.position());
    if (d > world.reach_radius())
      throw Error(errkind::kOutOfReach,
                  "'" + *core + "' is " + std::to_string(d) + " m away");
  }

  ActionResult result;
  result.frame_id = frame.id;
  result.action = action;
  const double p = world.primitive_success(action);
  result.ok = p >= 1.0 || world.rng().bernoulli(p);
  if (!result.ok) return result;  // failed attempt, no state change

  if (!frame.actions.empty() && action == frame.actions.back()) {
    apply_world_effects(world, frame);
    result.frame_completed = true;
  }
  return result;
}

Pose pose_within_reach(const WorldMap& map, const Vec2& target, const Vec2& from,
                       double reach_radius) {
  Vec2 dir = from - target;
  double base = std::atan2(dir.y, dir.x);
  if (dir.norm() < 1e-9) base = 0.0;
  const double radii[] = {0.6 * reach_radius, 0.75 * reach_radius, 0.45 * reach_radius,
                          0.3 * reach_radius};
  for (double radius : radii) {
    for (int k = 0; k < 16; ++k) {
      // sweep outward from the approach side: 0, +pi/8, -pi/8, ...
      const int half = (k + 1) / 2;
      const double angle = base + (k % 2 == 1 ? half : -half) * (kPi / 8.0);
      const Vec2 candidate{target.x + radius * std::cos(angle),
                           target.y + radius * std::sin(angle)};
      if (!map.in_free_space(candidate)) continue;
      if (!segment_clear(map, candidate, target)) continue;
      const double heading = std::atan2(target.y - candidate.y, target.x - candidate.x);
      return Pose{candidate.x, candidate.y, heading};
    }
  }
  throw Error(errkind::kNoAffordance, "no collision-free pose within reach of target");
}

Pose ground_truth_afforded_pose(const World& world, const FrameInstance& instance,
                                const FrameLibrary& library) {
  const SemanticFrame& frame = library.frame(instance.frame_id);
  const int stage = stage_of(frame, world.robot(), library);
  const auto core = core_class_at(frame, stage);
  if (!core.has_value())
    throw Error(errkind::kNoAffordance, "frame '" + frame.id + "' has no core element");
  const GroundTruthObject* obj = world.nearest_object(*core, world.robot().pose.position());
  if (obj == nullptr)
    throw Error(errkind::kNoAffordance, "no '" + *core + "' present in the world");
  return pose_within_reach(world.map(), obj->position, world.robot().pose.position(),
                           world.reach_radius());
}

bool postconditions_hold(const World& world, const SemanticFrame& frame) {
  for (const auto& effect : frame.postconditions) {
    switch (effect.kind) {
      case EffectKind::kGripperSet:
        if (!world.robot().gripper.has_value() || *world.robot().gripper != effect.args[0])
          return false;
        break;
      case EffectKind::kGripperClear:
        if (world.robot().gripper.has_value()) return false;
        break;
      case EffectKind::kObjectStateFlag: {
        bool found = false;
        for (const auto& obj : world.objects())
          if (obj.object_class == effect.args[0] && obj.flags.count(effect.args[1])) found = true;
        if (!found) return false;
        break;
      }
      case EffectKind::kObjectMovedTo: {
        bool found = false;
        for (const auto& obj : world.objects()) {
          if (obj.object_class != effect.args[0]) continue;
          const GroundTruthObject* dest = world.nearest_object(effect.args[1], obj.position);
          if (dest != nullptr && distance(obj.position, dest->position) <= 0.5) found = true;
        }
        if (!found) return false;
        break;
      }
    }
  }
  return true;
}

Vec2 sample_free_point(const WorldMap& map, Rng& rng) {
  for (int tries = 0; tries < kMaxRejectionTries; ++tries) {
    const Vec2 p{rng.uniform(map.bounds.lo.x, map.bounds.hi.x),
                 rng.uniform(map.bounds.lo.y, map.bounds.hi.y)};
    if (map.in_free_space(p)) return p;
  }
  throw Error(errkind::kEmptyFreeSpace, "could not sample a free point in the map");
}

Vec2 sample_room_point(const WorldMap& map, const Rect& room, Rng& rng) {
  for (int tries = 0; tries < kMaxRejectionTries; ++tries) {
    const Vec2 p{rng.uniform(room.lo.x, room.hi.x), rng.uniform(room.lo.y, room.hi.y)};
    if (map.in_free_space(p)) return p;
  }
  throw Error(errkind::kEmptyFreeSpace, "could not sample a free point in the room");
}

}  // namespace sefm
