#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sefm/filters.hpp"
#include "sefm/frames.hpp"
#include "sefm/planner.hpp"
#include "sefm/potentials.hpp"
#include "sefm/world.hpp"

namespace sefm {

enum class RunMode { kHold, kTour, kTask };

RunMode parse_run_mode(const std::string& name);
const char* run_mode_name(RunMode mode);

struct RunConfig {
  std::string scenario_path;
  std::string library_path;
  RunMode mode = RunMode::kTask;
  std::string task;                    // utterance, task mode only
  std::optional<std::string> holding;  // gripper override applied after load
  std::uint64_t seed = 0;
  int particles = 200;
  int iterations = 20;  // hold-mode update count
  PotentialParams params;
  ExecuteParams exec;
  std::string out_dir;  // empty: compute results, write nothing
  bool render = false;
  int snapshot_every = 10;
};

struct RunResult {
  TerminalStatus status = TerminalStatus::kSuccess;
  int timesteps = 0;
  double path_length = 0.0;
  std::vector<std::string> executed_frames;
  bool ordering_ok = true;
  // owner -> room name (or "background") -> particle mass
  std::map<std::string, std::map<std::string, double>> mass_by_room;
  // owner -> object class -> mass within 1.5 m of that class's true objects
  std::map<std::string, std::map<std::string, double>> mass_near;
};

// Runs one seeded scenario to completion; when out_dir is set, writes
// trace.jsonl and metrics.json (and renders snapshots when requested).
RunResult run_scenario(const RunConfig& config);

std::string metrics_json(const RunConfig& config, const RunResult& result);

struct SuiteGroup {
  std::string name;
  std::string scenario;
  std::string library;
  std::string task;
  int trials = 50;
  std::uint64_t seed_base = 0;
};

struct SuiteConfig {
  std::vector<SuiteGroup> groups;
  int particles = 200;
  int budget = 400;
  PotentialParams params;
  std::string out_dir;
  int workers = 0;  // 0: SEFM_WORKERS env, else hardware concurrency
};

struct TrialRow {
  std::uint64_t seed = 0;
  std::string status;
  int timesteps = 0;
  double path_length = 0.0;
  bool ordering_ok = true;
  std::string note;  // error detail when a trial threw
};

struct GroupReport {
  std::string name;
  int trials = 0;
  int successes = 0;
  double success_rate = 0.0;
  bool ordering_all = true;
  std::vector<TrialRow> rows;
};

struct SuiteReport {
  std::vector<GroupReport> groups;
};

SuiteConfig load_suite_config(const std::string& path);

// Fans trials out to a worker pool; every trial gets an isolated world and
// generator stream, so the report does not depend on scheduling.
SuiteReport run_experiment_suite(const SuiteConfig& config);

std::string suite_report_json(const SuiteReport& report);

// Shared plumbing.
std::string read_text_file(const std::string& path);
FrameLibrary load_library_file(const std::string& path);

// Radius used for the mass_near metric table.
inline constexpr double kMassNearRadius = 1.5;

}  // namespace sefm
