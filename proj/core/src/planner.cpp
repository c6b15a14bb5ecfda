#include "sefm/planner.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <set>

#include "sefm/error.hpp"
#include "sefm/particles.hpp"

namespace sefm {

const char* terminal_status_name(TerminalStatus status) {
  switch (status) {
    case TerminalStatus::kSuccess: return "success";
    case TerminalStatus::kFailure: return "failure";
    case TerminalStatus::kTimeout: return "timeout";
  }
  return "unknown";
}

std::vector<std::string> plan_precondition_chain(const FrameInstance& task,
                                                 const RobotState& state,
                                                 const FrameLibrary& library) {
  std::vector<std::string> chain;
  std::set<std::string> emitted;
  std::function<void(const std::string&)> visit = [&](const std::string& id) {
    if (emitted.count(id)) return;
    const SemanticFrame& frame = library.frame(id);
    for (const auto& pre : frame.preconditions) {
      if (precondition_satisfied(library.frame(pre), state, library)) continue;
      visit(pre);
    }
    emitted.insert(id);
    chain.push_back(id);
  };
  visit(task.frame_id);
  return chain;
}

namespace {

bool task_complete(const World& world, const SemanticFrame& task_frame) {
  if (!postconditions_hold(world, task_frame)) return false;
  // a frame with no postconditions succeeds only by actually running
  if (task_frame.postconditions.empty())
    return world.robot().has_executed(task_frame.id);
  return true;
}

bool is_kind(const Error& e, const char* kind) { return e.kind() == kind; }

// Same choice rule as select_navigation_goal: heaviest component, ties to the
// nearest mean.
Vec2 top_component_mean(const GaussianMixture& mixture, const Vec2& from) {
  const MixtureComponent* best = &mixture.components.front();
  for (const auto& c : mixture.components) {
    if (c.weight > best->weight + 1e-12) {
      best = &c;
    } else if (std::abs(c.weight - best->weight) <= 1e-12 &&
               distance(c.mean, from) < distance(best->mean, from)) {
      best = &c;
    }
  }
  return best->mean;
}

}  // namespace

ExecutionTrace execute_frame(const FrameInstance& task, World& world, BeliefState& beliefs,
                             const FrameLibrary& library, const ExecuteParams& params,
                             std::uint64_t seed) {
  ExecutionTrace trace;
  trace.task_frame = task.frame_id;
  const SemanticFrame& task_frame = library.frame(task.frame_id);

  std::map<std::string, Vec2> last_seen;
  const auto note_detections = [&last_seen](const Observation& o) {
    std::map<std::string, double> best;
    for (const auto& d : o.detections) {
      auto [it, fresh] = best.try_emplace(d.object_class, d.confidence);
      if (!fresh && d.confidence <= it->second) continue;
      it->second = d.confidence;
      last_seen[d.object_class] = d.position;
    }
  };
  {
    const Observation first = observe(world, world.robot().pose);
    note_detections(first);
    beliefs.observe_update(first, world.robot(), world.sensor());
  }

  for (int t = 1; t <= params.budget; ++t) {
    if (task_complete(world, task_frame)) {
      trace.status = TerminalStatus::kSuccess;
      trace.timesteps = static_cast<int>(trace.steps.size());
      return trace;
    }

    StepRecord rec;
    rec.timestep = t;

    const auto chain = plan_precondition_chain(task, world.robot(), library);
    const std::string active = chain.front();
    const SemanticFrame& frame = library.frame(active);
    rec.active_frame = active;

    const ParticleSet& frame_set = beliefs.frame_set(active);
    rec.active_mean = weighted_mean(frame_set);
    rec.active_ess = effective_sample_size(frame_set);

    const int stage = stage_of(frame, world.robot(), library);
    std::optional<std::string> core;
    for (const auto& element : frame.elements) {
      if (element.role_at(stage) == Role::kCore) {
        core = element.object_class;
        break;
      }
    }
    const ParticleSet& target_set =
        core.has_value() ? beliefs.object_set(*core) : frame_set;
    const Vec2 mode = kde_mode(target_set, params.kde_bandwidth);
    const bool mode_detected = !core.has_value() || last_seen.count(*core) > 0;
    rec.confident = mode_detected &&
                    mass_within(target_set, mode, params.confidence_radius) >=
                        params.confidence_mass;

    // Approach the freshest sighting when there is one; the mode of a
    // collapsed particle set can sit a few tenths off the object while each
    // detection re-draws its noise, so sightings self-correct across retries.
    const Vec2 target = (core.has_value() && last_seen.count(*core) > 0)
                            ? last_seen.at(*core)
                            : mode;

    Observation obs;
    bool have_obs = false;
    if (rec.confident) {
      const double to_target = distance(world.robot().pose.position(), target);
      if (to_target <= world.reach_radius() * 0.9) {
        try {
          for (const auto& action : frame.actions) {
            rec.actions.push_back(action);
            const ActionResult result =
                execute_primitive(world, action, FrameInstance{active, {}}, library);
            if (!result.ok) break;  // failed draw; retry next timestep
            if (result.frame_completed) {
              rec.completed_frame = active;
              trace.executed_frames.push_back(active);
            }
          }
        } catch (const Error& e) {
          // mode was off target: stay put, observe, let the filter refine
          if (!is_kind(e, errkind::kOutOfReach)) throw;
        }
      } else {
        try {
          const Pose goal = pose_within_reach(world.map(), target,
                                              world.robot().pose.position(),
                                              world.reach_radius());
          rec.goal = goal;
          double moved = 0.0;
          step_toward(world, goal, obs, moved);
          have_obs = true;
          rec.moved = moved;
          trace.path_length += moved;
        } catch (const Error& e) {
          if (!is_kind(e, errkind::kNoAffordance)) throw;
        }
      }
    } else {
      const GaussianMixture mixture =
          fit_mixture(frame_set, params.mixture_k_max,
                      derive_seed(seed, "mixture", static_cast<std::uint64_t>(t)));
      try {
        Pose goal =
            select_navigation_goal(mixture, world.map(), world.robot().pose, world.sensor());
        const bool at_goal =
            distance(goal.position(), world.robot().pose.position()) < 1e-9;
        if (at_goal) {
          // The selected viewpoint is where we already stand and it has not
          // produced a confident belief, so close in on the component mean
          // itself; every room fits inside the sensor radius.
          const Vec2 mean = top_component_mean(mixture, world.robot().pose.position());
          if (distance(mean, world.robot().pose.position()) > 1e-9 &&
              world.map().in_free_space(mean)) {
            const Vec2 at = world.robot().pose.position();
            goal = Pose{mean.x, mean.y, std::atan2(mean.y - at.y, mean.x - at.x)};
          }
        }
        rec.goal = goal;
        if (distance(goal.position(), world.robot().pose.position()) > 1e-9) {
          double moved = 0.0;
          step_toward(world, goal, obs, moved);
          have_obs = true;
          rec.moved = moved;
          trace.path_length += moved;
        }
      } catch (const Error& e) {
        // observe in place when nothing is reachable this step
        if (!is_kind(e, errkind::kNoReachableViewpoint) &&
            !is_kind(e, errkind::kUnreachable))
          throw;
      }
    }

    if (!have_obs) obs = observe(world, world.robot().pose);
    note_detections(obs);
    beliefs.observe_update(obs, world.robot(), world.sensor());
    rec.robot = world.robot().pose;
    trace.steps.push_back(std::move(rec));
  }

  trace.timesteps = static_cast<int>(trace.steps.size());
  if (task_complete(world, task_frame)) {
    trace.status = TerminalStatus::kSuccess;
  } else {
    trace.status = TerminalStatus::kTimeout;
    trace.failure_reason = "budget exhausted";
  }
  return trace;
}

bool verify_ordering_safety(const ExecutionTrace& trace, const FrameLibrary& library,
                            RobotState state) {
  for (const auto& step : trace.steps) {
    if (step.completed_frame.empty()) continue;
    const SemanticFrame& frame = library.frame(step.completed_frame);
    if (next_unmet_precondition(frame, state, library).has_value()) return false;
    state = apply_frame_effects(frame, std::move(state));
  }
  return true;
}

}  // namespace sefm
