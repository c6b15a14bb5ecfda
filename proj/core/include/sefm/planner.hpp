#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sefm/filters.hpp"
#include "sefm/frames.hpp"
#include "sefm/mixture.hpp"
#include "sefm/world.hpp"

namespace sefm {

enum class TerminalStatus { kSuccess, kFailure, kTimeout };

const char* terminal_status_name(TerminalStatus status);

struct StepRecord {
  int timestep = 0;
  Pose robot;
  std::string active_frame;
  bool confident = false;
  std::optional<Pose> goal;
  std::vector<std::string> actions;  // primitives attempted this timestep
  std::string completed_frame;       // nonempty when a frame finished here
  double moved = 0.0;
  Vec2 active_mean;                  // weighted mean of the active frame's set
  double active_ess = 0.0;
};

struct ExecutionTrace {
  std::string task_frame;
  std::vector<StepRecord> steps;
  TerminalStatus status = TerminalStatus::kTimeout;
  std::string failure_reason;
  int timesteps = 0;
  double path_length = 0.0;
  std::vector<std::string> executed_frames;  // completion order
};

struct ExecuteParams {
  int budget = 400;
  int mixture_k_max = 3;
  double confidence_mass = 0.5;   // required particle mass ...
  double confidence_radius = 1.0;  // ... within this radius of the belief mode
  double kde_bandwidth = 0.3;
};

// Depth-first linearization of the task frame's unmet preconditions, ending
// with the task frame itself. Preconditions already satisfied in the state
// are omitted along with their subtrees.
std::vector<std::string> plan_precondition_chain(const FrameInstance& task,
                                                 const RobotState& state,
                                                 const FrameLibrary& library);

// Active search and execution loop. Per timestep: act on the current belief
// (execute primitives when the target belief is confidently localized within
// reach, otherwise take one navigation step toward a viewpoint of the belief
// mixture), then observe and update all filters. Success the moment the task
// frame's postconditions hold in the world.
ExecutionTrace execute_frame(const FrameInstance& task, World& world, BeliefState& beliefs,
                             const FrameLibrary& library, const ExecuteParams& params,
                             std::uint64_t seed);

// Replays the trace's frame completions against projected robot state and
// confirms every frame's preconditions were satisfied when it ran.
bool verify_ordering_safety(const ExecutionTrace& trace, const FrameLibrary& library,
                            RobotState initial_state);

}  // namespace sefm
