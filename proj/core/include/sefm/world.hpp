// Deterministic 2D household world: an annotated metric map (named rooms,
// per-class room priors, rectangular obstacles), ground-truth objects, a
// range- and fov-limited detection sensor, grid navigation, and primitive
// actions whose postconditions drive the state transition.
//
// A World is a single-owner mutable state machine. Given the same scenario
// text, seed, and action sequence it reproduces the same trajectory and
// observation stream byte for byte.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sefm/frames.hpp"
#include "sefm/geometry.hpp"
#include "sefm/random.hpp"

namespace sefm {

struct SensorModel {
  double range = 5.0;
  double fov = 2.0 * kPi / 3.0;
  double sigma_z = 0.15;    // detection position noise
  double miss_rate = 0.05;  // per-view probability of missing a visible object
};

struct Room {
  std::string name;
  Rect rect;
};

struct RoomPrior {
  std::string room;
  double mass = 0.0;
};

struct WorldMap {
  Rect bounds;
  std::vector<Room> rooms;
  std::map<std::string, std::vector<RoomPrior>> priors;  // object class -> rooms
  std::vector<Rect> obstacles;

  bool in_free_space(const Vec2& p) const;
  // First declared room containing p, or nullptr ("background").
  const Room* room_at(const Vec2& p) const;
  const Room* find_room(const std::string& name) const;
  // Rooms that carry prior mass for the class.
  std::vector<std::string> prior_rooms(const std::string& object_class) const;
};

struct GroundTruthObject {
  std::string object_class;
  Vec2 position;
  std::set<std::string> flags;
};

struct Detection {
  std::string object_class;
  Vec2 position;
  double confidence = 1.0;
};

struct Observation {
  std::vector<Detection> detections;
  Pose viewpoint;
  double range = 0.0;
  double fov = 0.0;
};

struct NavigationResult {
  double path_length = 0.0;
  std::vector<Observation> observations;  // one per step, last at arrival
};

struct ActionResult {
  std::string frame_id;
  std::string action;
  bool ok = false;               // the primitive's success draw passed
  bool frame_completed = false;  // final action succeeded, effects applied
};

class World {
 public:
  World(WorldMap map, std::vector<GroundTruthObject> objects, RobotState robot,
        SensorModel sensor, std::uint64_t seed);

  const WorldMap& map() const { return map_; }
  const SensorModel& sensor() const { return sensor_; }
  const std::vector<GroundTruthObject>& objects() const { return objects_; }
  const RobotState& robot() const { return robot_; }
  RobotState& robot() { return robot_; }
  bool pose_level() const { return pose_level_; }
  void set_pose_level(bool v) { pose_level_ = v; }

  double reach_radius() const { return reach_radius_; }
  double step_length() const { return step_length_; }

  double primitive_success(const std::string& action) const;
  void set_primitive_success(const std::string& action, double p);

  // Moves the named object class into the gripper, removing the nearest map
  // instance if one exists. Used when a scenario starts the robot holding
  // something.
  void put_in_gripper(const std::string& object_class);

  const GroundTruthObject* nearest_object(const std::string& object_class,
                                          const Vec2& from) const;

  Rng& rng() { return rng_; }

  // Mutators used by execute_primitive.
  void remove_object(const std::string& object_class, const Vec2& near);
  void place_object(const std::string& object_class, const Vec2& at,
                    std::set<std::string> flags = {});
  void flag_object(const std::string& object_class, const Vec2& near, const std::string& flag);

 private:
  WorldMap map_;
  std::vector<GroundTruthObject> objects_;
  RobotState robot_;
  SensorModel sensor_;
  std::map<std::string, double> primitive_success_;
  double reach_radius_ = 0.8;
  double step_length_ = 0.25;
  bool pose_level_ = false;
  Rng rng_;
};

// Parses a scenario document and builds the seeded world. Throws Error with
// kind SyntaxError or GeometryError.
World load_scenario(const std::string& source_text, std::uint64_t seed);

// True when target is within range, inside the field of view, and the sight
// line crosses no obstacle.
bool visible_from(const WorldMap& map, const SensorModel& sensor, const Pose& viewpoint,
                  const Vec2& target);

// Detects every visible ground-truth object with probability 1 - miss_rate,
// perturbing positions by sigma_z. Consumes draws from the world stream.
Observation observe(World& world, const Pose& pose);

// Shortest obstacle-free path on a coarse grid (straight line when clear),
// advancing the robot in step_length increments with one observation per
// step. Throws Error(Unreachable).
NavigationResult step_navigate(World& world, const Pose& target);

// Single motion increment toward target; returns true on arrival. Used by
// the planner's replan-every-step loop.
bool step_toward(World& world, const Pose& target, Observation& obs, double& moved);

// Free-space path existence check used by goal selection.
bool path_exists(const WorldMap& map, const Vec2& from, const Vec2& to);
double path_length(const WorldMap& map, const Vec2& from, const Vec2& to);

// Executes one primitive of the frame. Requires every frame precondition to
// be met and the frame's current core object within reach. Executing the
// final action of the frame applies its postconditions to world and robot
// state and records the frame as executed. Throws Error with kind
// PreconditionViolation or OutOfReach.
ActionResult execute_primitive(World& world, const std::string& action,
                               const FrameInstance& instance, const FrameLibrary& library);

// Evaluation oracle: a collision-free pose within reach of the frame's
// current core object. Throws Error(NoAffordance) when the object is absent.
Pose ground_truth_afforded_pose(const World& world, const FrameInstance& instance,
                                const FrameLibrary& library);

// Whether every declared postcondition of the frame holds in (world, robot).
bool postconditions_hold(const World& world, const SemanticFrame& frame);

// Collision-free pose within reach of `target`, facing it. Deterministic
// angle sweep; throws Error(NoAffordance) when nothing fits.
Pose pose_within_reach(const WorldMap& map, const Vec2& target, const Vec2& from,
                       double reach_radius);

// Uniform draw from bounds minus obstacles. Throws Error(EmptyFreeSpace).
Vec2 sample_free_point(const WorldMap& map, Rng& rng);
// Uniform draw from room-rect minus obstacles.
Vec2 sample_room_point(const WorldMap& map, const Rect& room, Rng& rng);

}  // namespace sefm
