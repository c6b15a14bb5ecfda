#include "sefm/filters.hpp"

#include <algorithm>
#include <cmath>

#include "sefm/error.hpp"

namespace sefm {

namespace {

// Floor added to positive-detection likelihoods so one noisy detection cannot
// annihilate the whole set.
constexpr double kEpsilonFloor = 1e-6;

void push_event(std::vector<BeliefEvent>* events, const std::string& owner,
                BeliefEventKind kind, int step) {
  if (events != nullptr) events->push_back(BeliefEvent{owner, kind, step});
}

}  // namespace

const char* belief_event_name(BeliefEventKind kind) {
  switch (kind) {
    case BeliefEventKind::kReinvigoration: return "reinvigoration";
    case BeliefEventKind::kDegenerateReset: return "degenerate_reset";
  }
  return "unknown";
}

ParticleSet update_object_filter(const ParticleSet& set, const Observation& obs,
                                 const WorldMap& map, const SensorModel& sensor,
                                 const PotentialParams& params, Rng& rng,
                                 std::vector<BeliefEvent>* events, int step) {
  ParticleSet out = set;
  bool detected = false;
  for (const auto& det : obs.detections) {
    if (det.object_class != set.owner) continue;
    detected = true;
    for (std::size_t i = 0; i < out.size(); ++i)
      out.weights[i] *=
          gaussian2(out.positions[i], det.position, sensor.sigma_z) + kEpsilonFloor;
  }
  if (!detected) {
    SensorModel probe = sensor;
    probe.range = obs.range;
    probe.fov = obs.fov;
    for (std::size_t i = 0; i < out.size(); ++i)
      if (visible_from(map, probe, obs.viewpoint, out.positions[i]))
        out.weights[i] *= sensor.miss_rate;
  }

  double total = 0.0;
  for (double w : out.weights) total += w;
  if (total <= 0.0) {
    std::fill(out.weights.begin(), out.weights.end(),
              1.0 / static_cast<double>(out.size()));
    out = reinvigorate(out, map, 1.0, rng);
    push_event(events, out.owner, BeliefEventKind::kDegenerateReset, step);
    return out;
  }
  out.normalize();
  const double n = static_cast<double>(out.size());
  if (effective_sample_size(out) < params.ess_threshold * n) {
    out = resample(out, rng);
    out = reinvigorate(out, map, params.reinvigoration_fraction, rng);
    push_event(events, out.owner, BeliefEventKind::kReinvigoration, step);
  }
  return out;
}

ParticleSet predict_frame(const ParticleSet& set, const SemanticFrame& frame,
                          const WorldMap& map, const PotentialParams& params, Rng& rng) {
  if (frame.permanence == Permanence::kStatic) return set;
  const double sigma =
      frame.movable_sigma > 0.0 ? frame.movable_sigma : params.sigma_p_movable;
  if (sigma <= 0.0) return set;
  ParticleSet out = set;
  for (auto& pos : out.positions) {
    for (int attempt = 0; attempt < 8; ++attempt) {
      const Vec2 candidate = rng.normal2(pos, sigma);
      if (map.in_free_space(candidate)) {
        pos = candidate;
        break;
      }
    }
  }
  return out;
}

ParticleSet update_frame_filter(const ParticleSet& set, const SemanticFrame& frame,
                                const std::map<std::string, ParticleSet>& object_sets,
                                const std::map<std::string, ParticleSet>& frame_sets,
                                const RobotState& state, const FrameLibrary& library,
                                const WorldMap& map, const PotentialParams& params,
                                bool pose_level, double ring_radius, Rng& rng,
                                std::vector<BeliefEvent>* events, int step) {
  ParticleSet out = resample(set, rng);
  out = predict_frame(out, frame, map, params, rng);

  // Gamma(i): elements whose scheduled role at the current stage couples them,
  // plus the next unmet precondition frame. Disjoint neighbors drop out of the
  // product entirely.
  const int stage = stage_of(frame, state, library);
  struct Neighbor {
    const ParticleSet* set;
    RelationDistribution rel;
    bool ring;
  };
  std::vector<Neighbor> measurement_neighbors;
  for (const auto& element : frame.elements) {
    const Role role = element.role_at(stage);
    if (role == Role::kDisjoint) continue;
    auto it = object_sets.find(element.object_class);
    if (it == object_sets.end()) continue;
    measurement_neighbors.push_back(Neighbor{&it->second, RelationDistribution::point_mass(role),
                                             pose_level && role == Role::kCore});
  }
  const ParticleSet* context_set = nullptr;
  const auto pending = next_unmet_precondition(frame, state, library);
  if (pending.has_value()) {
    auto it = frame_sets.find(*pending);
    if (it != frame_sets.end()) context_set = &it->second;
  }

  const RelationDistribution precond_rel =
      RelationDistribution::point_mass(Role::kPrecondition);
  for (std::size_t k = 0; k < out.size(); ++k) {
    double weight = 1.0;
    for (const auto& nb : measurement_neighbors) {
      weight *= nb.ring ? ring_measurement_factor(out.positions[k], *nb.set, nb.rel,
                                                  ring_radius, params)
                        : measurement_factor(out.positions[k], *nb.set, nb.rel, params);
      if (weight == 0.0) break;
    }
    if (weight > 0.0 && context_set != nullptr)
      weight *= context_factor(out.positions[k], *context_set, precond_rel, params);
    out.weights[k] = weight;
  }

  double total = 0.0;
  for (double w : out.weights) total += w;
  if (total <= 0.0) {
    std::fill(out.weights.begin(), out.weights.end(),
              1.0 / static_cast<double>(out.size()));
    push_event(events, out.owner, BeliefEventKind::kDegenerateReset, step);
    return out;
  }
  out.normalize();
  const double n = static_cast<double>(out.size());
  if (params.reinvigoration_fraction > 0.0 &&
      effective_sample_size(out) < params.ess_threshold * n) {
    out = reinvigorate(out, map, params.reinvigoration_fraction, rng);
    push_event(events, out.owner, BeliefEventKind::kReinvigoration, step);
  }
  return out;
}

BeliefState::BeliefState(const WorldMap& map, const FrameLibrary& library,
                         const PotentialParams& params, int particles_per_set,
                         std::uint64_t seed)
    : map_(&map), library_(&library), params_(params), seed_(seed) {
  for (const auto& object_class : library.object_classes()) {
    ParticleSet set = init_particles_from_prior(map, object_class, particles_per_set,
                                                rng_for("object:" + object_class));
    object_sets_.emplace(object_class, std::move(set));
  }
  for (const auto& frame : library.frames()) {
    ParticleSet set = init_particles_from_prior(map, frame.id, particles_per_set,
                                                rng_for("frame:" + frame.id));
    set.owner = frame.id;
    frame_sets_.emplace(frame.id, std::move(set));
  }
}

void BeliefState::set_pose_level(bool on, double ring_radius) {
  pose_level_ = on;
  ring_radius_ = ring_radius;
}

void BeliefState::observe_update(const Observation& obs, const RobotState& state,
                                 const SensorModel& sensor) {
  ++step_;
  for (auto& [object_class, set] : object_sets_)
    set = update_object_filter(set, obs, *map_, sensor, params_,
                               rng_for("object:" + object_class), &events_, step_);
  const std::map<std::string, ParticleSet> previous = frame_sets_;
  for (auto& [frame_id, set] : frame_sets_)
    set = update_frame_filter(previous.at(frame_id), library_->frame(frame_id),
                              object_sets_, previous, state, *library_, *map_, params_,
                              pose_level_, ring_radius_, rng_for("frame:" + frame_id),
                              &events_, step_);
}

const ParticleSet& BeliefState::object_set(const std::string& object_class) const {
  auto it = object_sets_.find(object_class);
  if (it == object_sets_.end())
    throw Error(errkind::kConfig, "no object filter for class '" + object_class + "'");
  return it->second;
}

const ParticleSet& BeliefState::frame_set(const std::string& frame_id) const {
  auto it = frame_sets_.find(frame_id);
  if (it == frame_sets_.end())
    throw Error(errkind::kConfig, "no frame filter for '" + frame_id + "'");
  return it->second;
}

Rng& BeliefState::rng_for(const std::string& tag) {
  auto it = rngs_.find(tag);
  if (it == rngs_.end()) it = rngs_.emplace(tag, Rng(derive_seed(seed_, tag, 0))).first;
  return it->second;
}

}  // namespace sefm
