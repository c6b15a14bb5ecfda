#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sefm/frames.hpp"
#include "sefm/particles.hpp"
#include "sefm/potentials.hpp"
#include "sefm/world.hpp"

namespace sefm {

enum class BeliefEventKind { kReinvigoration, kDegenerateReset };

const char* belief_event_name(BeliefEventKind kind);

struct BeliefEvent {
  std::string owner;
  BeliefEventKind kind = BeliefEventKind::kReinvigoration;
  int step = 0;
};

// One observation update of an object-location filter: Gaussian positive
// updates per detection of the owner class, a miss-rate penalty for particles
// inside the observed region when the class went undetected, then
// renormalization with resample + reinvigoration on low ESS.
ParticleSet update_object_filter(const ParticleSet& set, const Observation& obs,
                                 const WorldMap& map, const SensorModel& sensor,
                                 const PotentialParams& params, Rng& rng,
                                 std::vector<BeliefEvent>* events = nullptr, int step = 0);

// Prediction step: identity for static frames, Gaussian jitter (rejected back
// into free space) for movable ones. Weights are untouched.
ParticleSet predict_frame(const ParticleSet& set, const SemanticFrame& frame,
                          const WorldMap& map, const PotentialParams& params, Rng& rng);

// One full particle update for a single frame: resample by the previous
// weights, predict, then reweight by the product of measurement factors over
// coupled elements and context factors over the pending precondition frame.
// Neighbor frame sets are read from `frame_sets` as-of the previous step so
// the update is Jacobi-style and order-independent.
ParticleSet update_frame_filter(const ParticleSet& set, const SemanticFrame& frame,
                                const std::map<std::string, ParticleSet>& object_sets,
                                const std::map<std::string, ParticleSet>& frame_sets,
                                const RobotState& state, const FrameLibrary& library,
                                const WorldMap& map, const PotentialParams& params,
                                bool pose_level, double ring_radius, Rng& rng,
                                std::vector<BeliefEvent>* events = nullptr, int step = 0);

// Owns every particle set of a run: one object filter per object class the
// library mentions and one frame filter per frame. Each owner draws from its
// own derived random substream, so belief evolution does not depend on how
// many draws any other owner consumed.
class BeliefState {
 public:
  BeliefState(const WorldMap& map, const FrameLibrary& library,
              const PotentialParams& params, int particles_per_set, std::uint64_t seed);

  void set_pose_level(bool on, double ring_radius);

  // Object filters first, then all frame filters against the fresh object
  // posteriors and the previous step's frame sets.
  void observe_update(const Observation& obs, const RobotState& state,
                      const SensorModel& sensor);

  const std::map<std::string, ParticleSet>& object_sets() const { return object_sets_; }
  const std::map<std::string, ParticleSet>& frame_sets() const { return frame_sets_; }
  const ParticleSet& object_set(const std::string& object_class) const;
  const ParticleSet& frame_set(const std::string& frame_id) const;

  int step() const { return step_; }
  const std::vector<BeliefEvent>& events() const { return events_; }

 private:
  Rng& rng_for(const std::string& tag);

  const WorldMap* map_;
  const FrameLibrary* library_;
  PotentialParams params_;
  std::uint64_t seed_;
  bool pose_level_ = false;
  double ring_radius_ = 0.8;
  int step_ = 0;
  std::map<std::string, ParticleSet> object_sets_;
  std::map<std::string, ParticleSet> frame_sets_;
  std::map<std::string, Rng> rngs_;
  std::vector<BeliefEvent> events_;
};

}  // namespace sefm
