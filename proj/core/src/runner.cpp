#include "sefm/runner.hpp"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "sefm/error.hpp"
#include "sefm/render.hpp"
#include "sefm/trace.hpp"

namespace sefm {

using json = nlohmann::ordered_json;

RunMode parse_run_mode(const std::string& name) {
  if (name == "hold") return RunMode::kHold;
  if (name == "tour") return RunMode::kTour;
  if (name == "task") return RunMode::kTask;
  throw Error(errkind::kConfig, "unknown run mode '" + name + "'");
}

const char* run_mode_name(RunMode mode) {
  switch (mode) {
    case RunMode::kHold: return "hold";
    case RunMode::kTour: return "tour";
    case RunMode::kTask: return "task";
  }
  return "unknown";
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(errkind::kConfig, "cannot open file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

FrameLibrary load_library_file(const std::string& path) {
  return parse_frame_library(read_text_file(path));
}

namespace {

std::map<std::string, double> mass_by_room_for(const ParticleSet& set,
                                               const WorldMap& map) {
  std::map<std::string, double> table;
  for (const auto& room : map.rooms) table[room.name] = 0.0;
  table["background"] = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const Room* room = map.room_at(set.positions[i]);
    table[room != nullptr ? room->name : "background"] += set.weights[i];
  }
  return table;
}

std::map<std::string, double> mass_near_for(const ParticleSet& set, const World& world) {
  std::map<std::string, std::vector<Vec2>> instances;
  for (const auto& obj : world.objects())
    instances[obj.object_class].push_back(obj.position);
  std::map<std::string, double> table;
  const double r2 = kMassNearRadius * kMassNearRadius;
  for (const auto& [object_class, positions] : instances) {
    double mass = 0.0;
    for (std::size_t i = 0; i < set.size(); ++i) {
      for (const auto& p : positions) {
        if ((set.positions[i] - p).norm2() <= r2) {
          mass += set.weights[i];
          break;
        }
      }
    }
    table[object_class] = mass;
  }
  return table;
}

void snapshot_all(TraceWriter& writer, const BeliefState& beliefs, int step) {
  for (const auto& [owner, set] : beliefs.object_sets())
    writer.write_belief(step, "object", set);
  for (const auto& [owner, set] : beliefs.frame_sets())
    writer.write_belief(step, "frame", set);
}

void render_to_file(const World& world, const BeliefState& beliefs,
                    const std::filesystem::path& path) {
  std::vector<const ParticleSet*> sets;
  for (const auto& [owner, set] : beliefs.object_sets()) sets.push_back(&set);
  for (const auto& [owner, set] : beliefs.frame_sets()) sets.push_back(&set);
  const Pose robot = world.robot().pose;
  const Image image = render_snapshot(world.map(), sets, world.objects(), &robot);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(errkind::kConfig, "cannot write '" + path.string() + "'");
  write_ppm(image, out);
}

}  // namespace

RunResult run_scenario(const RunConfig& config) {
  const std::string scenario_text = read_text_file(config.scenario_path);
  const FrameLibrary library = load_library_file(config.library_path);
  World world = load_scenario(scenario_text, config.seed);
  if (config.holding.has_value()) world.put_in_gripper(*config.holding);

  BeliefState beliefs(world.map(), library, config.params, config.particles, config.seed);
  beliefs.set_pose_level(world.pose_level(), world.reach_radius());
  const RobotState initial_state = world.robot();

  std::ofstream trace_stream;
  std::optional<TraceWriter> writer;
  std::filesystem::path out_dir;
  if (!config.out_dir.empty()) {
    out_dir = config.out_dir;
    std::filesystem::create_directories(out_dir);
    trace_stream.open(out_dir / "trace.jsonl", std::ios::binary);
    if (!trace_stream)
      throw Error(errkind::kConfig, "cannot write trace in '" + config.out_dir + "'");
    writer.emplace(trace_stream);
    writer->write_meta(config.scenario_path, config.library_path,
                       run_mode_name(config.mode), config.seed, config.particles);
    snapshot_all(*writer, beliefs, 0);
    if (config.render) render_to_file(world, beliefs, out_dir / "render_initial.ppm");
  }

  RunResult result;
  std::size_t events_written = 0;
  auto flush_events = [&]() {
    if (!writer.has_value()) return;
    const auto& events = beliefs.events();
    for (; events_written < events.size(); ++events_written)
      writer->write_event(events[events_written]);
  };

  switch (config.mode) {
    case RunMode::kHold: {
      for (int t = 1; t <= config.iterations; ++t) {
        const Observation obs = observe(world, world.robot().pose);
        beliefs.observe_update(obs, world.robot(), world.sensor());
        if (writer.has_value() &&
            (t % config.snapshot_every == 0 || t == config.iterations))
          snapshot_all(*writer, beliefs, t);
      }
      result.status = TerminalStatus::kSuccess;
      result.timesteps = config.iterations;
      break;
    }
    case RunMode::kTour: {
      int t = 0;
      auto update_here = [&]() {
        const Observation obs = observe(world, world.robot().pose);
        beliefs.observe_update(obs, world.robot(), world.sensor());
        ++t;
        if (writer.has_value() && t % config.snapshot_every == 0)
          snapshot_all(*writer, beliefs, t);
      };
      update_here();
      for (const auto& room : world.map().rooms) {
        const Vec2 center = room.rect.center();
        if (!world.map().in_free_space(center)) continue;
        const Pose target{center.x, center.y, 0.0};
        for (int guard = 0; guard < 4000; ++guard) {
          Observation obs;
          double moved = 0.0;
          const bool arrived = step_toward(world, target, obs, moved);
          beliefs.observe_update(obs, world.robot(), world.sensor());
          result.path_length += moved;
          ++t;
          if (writer.has_value() && t % config.snapshot_every == 0)
            snapshot_all(*writer, beliefs, t);
          if (arrived) break;
        }
        // two in-place rotations cover the full circle with a 2pi/3 sensor
        for (int spin = 0; spin < 2; ++spin) {
          RobotState& robot = world.robot();
          robot.pose.heading = wrap_angle(robot.pose.heading + world.sensor().fov);
          update_here();
        }
      }
      result.status = TerminalStatus::kSuccess;
      result.timesteps = t;
      if (writer.has_value()) snapshot_all(*writer, beliefs, t);
      break;
    }
    case RunMode::kTask: {
      if (config.task.empty())
        throw Error(errkind::kConfig, "task mode requires a task utterance");
      const FrameInstance instance = parse_command(config.task, library);
      const ExecutionTrace trace =
          execute_frame(instance, world, beliefs, library, config.exec, config.seed);
      result.status = trace.status;
      result.timesteps = trace.timesteps;
      result.path_length = trace.path_length;
      result.executed_frames = trace.executed_frames;
      result.ordering_ok = verify_ordering_safety(trace, library, initial_state);
      if (writer.has_value()) {
        for (const auto& step : trace.steps) writer->write_step(step);
        snapshot_all(*writer, beliefs, trace.timesteps);
        flush_events();
        writer->write_terminal(trace.status, trace.failure_reason, trace.timesteps,
                               trace.path_length);
      }
      break;
    }
  }

  for (const auto& [owner, set] : beliefs.object_sets()) {
    result.mass_by_room[owner] = mass_by_room_for(set, world.map());
    result.mass_near[owner] = mass_near_for(set, world);
  }
  for (const auto& [owner, set] : beliefs.frame_sets()) {
    result.mass_by_room[owner] = mass_by_room_for(set, world.map());
    result.mass_near[owner] = mass_near_for(set, world);
  }

  if (writer.has_value()) {
    flush_events();
    if (config.mode != RunMode::kTask)
      writer->write_terminal(result.status, "", result.timesteps, result.path_length);
    trace_stream.close();
    std::ofstream metrics(out_dir / "metrics.json", std::ios::binary);
    if (!metrics)
      throw Error(errkind::kConfig, "cannot write metrics in '" + config.out_dir + "'");
    metrics << metrics_json(config, result) << '\n';
    if (config.render) render_to_file(world, beliefs, out_dir / "render_final.ppm");
  }
  return result;
}

std::string metrics_json(const RunConfig& config, const RunResult& result) {
  json j;
  j["schema"] = kMetricsSchema;
  j["mode"] = run_mode_name(config.mode);
  j["scenario"] = config.scenario_path;
  j["library"] = config.library_path;
  j["task"] = config.task;
  j["holding"] = config.holding.has_value() ? json(*config.holding) : json();
  j["seed"] = config.seed;
  j["particles"] = config.particles;
  j["status"] = terminal_status_name(result.status);
  j["timesteps"] = result.timesteps;
  j["path_length"] = result.path_length;
  j["ordering_ok"] = result.ordering_ok;
  j["executed_frames"] = result.executed_frames;
  j["mass_by_room"] = result.mass_by_room;
  j["mass_near"] = result.mass_near;
  return j.dump(2);
}

SuiteConfig load_suite_config(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw Error(errkind::kConfig, "suite config: " + std::string(e.what()));
  }
  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path fp(p);
    if (fp.is_absolute() || base.empty()) return p;
    return (base / fp).lexically_normal().string();
  };
  SuiteConfig config;
  try {
    config.particles = j.value("particles", 200);
    config.budget = j.value("budget", 400);
    if (j.contains("params")) {
      const auto& p = j.at("params");
      config.params.sigma_m = p.value("sigma_m", config.params.sigma_m);
      config.params.sigma_c = p.value("sigma_c", config.params.sigma_c);
      config.params.sigma_p_movable =
          p.value("sigma_p_movable", config.params.sigma_p_movable);
      config.params.ess_threshold = p.value("ess_threshold", config.params.ess_threshold);
      config.params.reinvigoration_fraction =
          p.value("reinvigoration_fraction", config.params.reinvigoration_fraction);
    }
    config.workers = j.value("workers", 0);
    for (const auto& g : j.at("groups")) {
      SuiteGroup group;
      group.name = g.at("name").get<std::string>();
      group.scenario = resolve(g.at("scenario").get<std::string>());
      group.library = resolve(g.at("library").get<std::string>());
      group.task = g.at("task").get<std::string>();
      group.trials = g.value("trials", 50);
      group.seed_base = g.value("seed_base", std::uint64_t{0});
      if (group.trials < 1)
        throw Error(errkind::kConfig, "group '" + group.name + "' has no trials");
      config.groups.push_back(std::move(group));
    }
  } catch (const json::exception& e) {
    throw Error(errkind::kConfig, "suite config: " + std::string(e.what()));
  }
  if (config.groups.empty()) throw Error(errkind::kConfig, "suite config has no groups");
  return config;
}

namespace {

int worker_count(const SuiteConfig& config) {
  if (config.workers > 0) return config.workers;
  if (const char* env = std::getenv("SEFM_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::min(8u, std::max(1u, hw)));
}

}  // namespace

SuiteReport run_experiment_suite(const SuiteConfig& config) {
  struct Job {
    std::size_t group;
    int trial;
  };
  std::vector<Job> jobs;
  SuiteReport report;
  for (std::size_t g = 0; g < config.groups.size(); ++g) {
    GroupReport group;
    group.name = config.groups[g].name;
    group.trials = config.groups[g].trials;
    group.rows.resize(config.groups[g].trials);
    report.groups.push_back(std::move(group));
    for (int t = 0; t < config.groups[g].trials; ++t) jobs.push_back(Job{g, t});
  }

  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      const Job job = jobs[i];
      const SuiteGroup& group = config.groups[job.group];
      TrialRow& row = report.groups[job.group].rows[job.trial];
      row.seed = group.seed_base + static_cast<std::uint64_t>(job.trial);
      try {
        RunConfig rc;
        rc.scenario_path = group.scenario;
        rc.library_path = group.library;
        rc.mode = RunMode::kTask;
        rc.task = group.task;
        rc.seed = row.seed;
        rc.particles = config.particles;
        rc.params = config.params;
        rc.exec.budget = config.budget;
        const RunResult result = run_scenario(rc);
        row.status = terminal_status_name(result.status);
        row.timesteps = result.timesteps;
        row.path_length = result.path_length;
        row.ordering_ok = result.ordering_ok;
      } catch (const Error& e) {
        row.status = "failure";
        row.note = std::string(e.kind()) + ": " + e.what();
      } catch (const std::exception& e) {
        row.status = "failure";
        row.note = e.what();
      }
    }
  };

  const int workers = std::max(1, std::min<int>(worker_count(config),
                                                static_cast<int>(jobs.size())));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& th : pool) th.join();

  for (auto& group : report.groups) {
    group.successes = 0;
    group.ordering_all = true;
    for (const auto& row : group.rows) {
      if (row.status == "success" && row.ordering_ok) ++group.successes;
      if (!row.ordering_ok) group.ordering_all = false;
    }
    group.success_rate =
        group.trials > 0 ? static_cast<double>(group.successes) / group.trials : 0.0;
  }

  if (!config.out_dir.empty()) {
    std::filesystem::create_directories(config.out_dir);
    std::ofstream out(std::filesystem::path(config.out_dir) / "report.json",
                      std::ios::binary);
    if (!out)
      throw Error(errkind::kConfig, "cannot write report in '" + config.out_dir + "'");
    out << suite_report_json(report) << '\n';
  }
  return report;
}

std::string suite_report_json(const SuiteReport& report) {
  json j;
  j["schema"] = kReportSchema;
  json groups = json::array();
  for (const auto& group : report.groups) {
    json g;
    g["name"] = group.name;
    g["trials"] = group.trials;
    g["successes"] = group.successes;
    g["success_rate"] = group.success_rate;
    g["ordering_all"] = group.ordering_all;
    json rows = json::array();
    for (const auto& row : group.rows) {
      json r;
      r["seed"] = row.seed;
      r["status"] = row.status;
      r["timesteps"] = row.timesteps;
      r["path_length"] = row.path_length;
      r["ordering_ok"] = row.ordering_ok;
      r["note"] = row.note;
      rows.push_back(std::move(r));
    }
    g["rows"] = std::move(rows);
    groups.push_back(std::move(g));
  }
  j["groups"] = std::move(groups);
  return j.dump(2);
}

}  // namespace sefm
