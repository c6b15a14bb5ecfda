#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sefm/error.hpp"
#include "sefm/render.hpp"
#include "sefm/runner.hpp"
#include "sefm/trace.hpp"

namespace {

using json = nlohmann::ordered_json;

constexpr int kExitSuccess = 0;
constexpr int kExitTaskFailure = 1;
constexpr int kExitConfigError = 2;

// File, utterance, and configuration problems exit 2; runtime task
// impossibilities exit 1.
int exit_code_for(const sefm::Error& e) {
  const std::string kind = e.kind();
  if (kind == sefm::errkind::kUnreachable || kind == sefm::errkind::kOutOfReach ||
      kind == sefm::errkind::kPreconditionViolation ||
      kind == sefm::errkind::kNoAffordance ||
      kind == sefm::errkind::kNoReachableViewpoint ||
      kind == sefm::errkind::kEmptyFreeSpace)
    return kExitTaskFailure;
  return kExitConfigError;
}

void print_error(const std::string& kind, const std::string& message) {
  json j;
  j["error"]["kind"] = kind;
  j["error"]["message"] = message;
  std::cerr << j.dump() << '\n';
}

std::string default_out_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("SEFM_OUT_DIR")) return env;
  return {};
}

int cmd_run(sefm::RunConfig config, const std::string& mode_name,
            const std::string& holding) {
  config.mode = sefm::parse_run_mode(mode_name);
  if (!holding.empty()) config.holding = holding;
  config.out_dir = default_out_dir(config.out_dir);
  const sefm::RunResult result = sefm::run_scenario(config);
  std::cout << sefm::metrics_json(config, result) << '\n';
  return result.status == sefm::TerminalStatus::kSuccess ? kExitSuccess
                                                         : kExitTaskFailure;
}

int cmd_suite(const std::string& config_path, const std::string& out_dir, int workers) {
  sefm::SuiteConfig config = sefm::load_suite_config(config_path);
  if (!out_dir.empty()) config.out_dir = out_dir;
  config.out_dir = default_out_dir(config.out_dir);
  if (workers > 0) config.workers = workers;
  const sefm::SuiteReport report = sefm::run_experiment_suite(config);
  std::cout << sefm::suite_report_json(report) << '\n';
  return kExitSuccess;
}

int cmd_render(const std::string& trace_path, const std::string& scenario_path,
               std::string out_dir) {
  out_dir = default_out_dir(out_dir);
  if (out_dir.empty())
    throw sefm::Error(sefm::errkind::kConfig, "render requires an output directory");
  std::ifstream in(trace_path, std::ios::binary);
  if (!in)
    throw sefm::Error(sefm::errkind::kConfig, "cannot open trace '" + trace_path + "'");
  const sefm::TraceData trace = sefm::read_trace(in);
  const sefm::World world =
      sefm::load_scenario(sefm::read_text_file(scenario_path), trace.seed);

  std::map<int, std::vector<const sefm::ParticleSet*>> by_step;
  for (const auto& snap : trace.beliefs) by_step[snap.step].push_back(&snap.set);

  std::filesystem::create_directories(out_dir);
  for (const auto& [step, sets] : by_step) {
    const sefm::Image image =
        sefm::render_snapshot(world.map(), sets, world.objects(), nullptr);
    std::ostringstream name;
    name << "snapshot_" << step << ".ppm";
    std::ofstream out(std::filesystem::path(out_dir) / name.str(), std::ios::binary);
    if (!out)
      throw sefm::Error(sefm::errkind::kConfig, "cannot write into '" + out_dir + "'");
    sefm::write_ppm(image, out);
  }
  json j;
  j["rendered_steps"] = by_step.size();
  j["out_dir"] = out_dir;
  std::cout << j.dump() << '\n';
  return kExitSuccess;
}

int cmd_validate(const std::string& library_path, const std::string& scenario_path) {
  if (library_path.empty() && scenario_path.empty())
    throw sefm::Error(sefm::errkind::kConfig, "validate needs --library or --scenario");
  json j;
  if (!library_path.empty()) {
    const sefm::FrameLibrary library = sefm::load_library_file(library_path);
    j["library"]["path"] = library_path;
    j["library"]["frames"] = library.size();
  }
  if (!scenario_path.empty()) {
    const sefm::World world =
        sefm::load_scenario(sefm::read_text_file(scenario_path), 0);
    j["scenario"]["path"] = scenario_path;
    j["scenario"]["rooms"] = world.map().rooms.size();
    j["scenario"]["objects"] = world.objects().size();
  }
  j["ok"] = true;
  std::cout << j.dump() << '\n';
  return kExitSuccess;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semantic-frame localization runner"};
  app.require_subcommand(1);

  sefm::RunConfig run_config;
  std::string run_mode = "task";
  std::string run_holding;
  auto* run = app.add_subcommand("run", "Run one seeded scenario");
  run->add_option("--scenario", run_config.scenario_path, "Scenario file")->required();
  run->add_option("--library", run_config.library_path, "Frame library file")->required();
  run->add_option("--mode", run_mode, "hold | tour | task");
  run->add_option("--task", run_config.task, "Task utterance (task mode)");
  run->add_option("--holding", run_holding, "Start with this object in the gripper");
  run->add_option("--seed", run_config.seed, "Random seed");
  run->add_option("--particles", run_config.particles, "Particles per belief")
      ->check(CLI::PositiveNumber);
  run->add_option("--iterations", run_config.iterations, "Hold-mode updates")
      ->check(CLI::PositiveNumber);
  run->add_option("--budget", run_config.exec.budget, "Task-mode timestep budget")
      ->check(CLI::PositiveNumber);
  run->add_option("--out", run_config.out_dir, "Output directory (or SEFM_OUT_DIR)");
  run->add_flag("--render", run_config.render, "Write PPM snapshots");
  run->add_option("--snapshot-every", run_config.snapshot_every,
                  "Belief snapshot cadence")
      ->check(CLI::PositiveNumber);
  run->add_option("--sigma-m", run_config.params.sigma_m, "Measurement scale (m)");
  run->add_option("--sigma-c", run_config.params.sigma_c, "Context scale (m)");
  run->add_option("--sigma-p", run_config.params.sigma_p_movable,
                  "Movable prediction scale (m)");
  run->add_option("--ess-threshold", run_config.params.ess_threshold,
                  "Reinvigoration ESS fraction");
  run->add_option("--reinvigoration", run_config.params.reinvigoration_fraction,
                  "Fraction of particles replaced");

  std::string suite_config_path, suite_out;
  int suite_workers = 0;
  auto* suite = app.add_subcommand("suite", "Run an experiment suite");
  suite->add_option("--config", suite_config_path, "Suite config JSON")->required();
  suite->add_option("--out", suite_out, "Output directory (or SEFM_OUT_DIR)");
  suite->add_option("--workers", suite_workers, "Worker threads (or SEFM_WORKERS)");

  std::string render_trace, render_scenario, render_out;
  auto* render = app.add_subcommand("render", "Render trace snapshots to PPM");
  render->add_option("--trace", render_trace, "Trace JSON-lines file")->required();
  render->add_option("--scenario", render_scenario, "Scenario file")->required();
  render->add_option("--out", render_out, "Output directory (or SEFM_OUT_DIR)");

  std::string validate_library, validate_scenario;
  auto* validate = app.add_subcommand("validate", "Parse-check frame/scenario files");
  validate->add_option("--library", validate_library, "Frame library file");
  validate->add_option("--scenario", validate_scenario, "Scenario file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitSuccess : kExitConfigError;
  }

  try {
    if (run->parsed()) return cmd_run(run_config, run_mode, run_holding);
    if (suite->parsed()) return cmd_suite(suite_config_path, suite_out, suite_workers);
    if (render->parsed()) return cmd_render(render_trace, render_scenario, render_out);
    if (validate->parsed()) return cmd_validate(validate_library, validate_scenario);
  } catch (const sefm::Error& e) {
    print_error(e.kind(), e.what());
    return exit_code_for(e);
  } catch (const std::exception& e) {
    print_error("InternalError", e.what());
    return kExitConfigError;
  }
  return kExitConfigError;
}
