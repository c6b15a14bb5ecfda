// Acceptance gate. Each criterion prints exactly one PASS/FAIL line with the
// measured numbers; the process exits nonzero if any criterion fails. All
// seeds, tolerances, and time budgets are fixed here.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "grid_oracle.hpp"
#include "sefm/error.hpp"
#include "sefm/filters.hpp"
#include "sefm/frames.hpp"
#include "sefm/particles.hpp"
#include "sefm/potentials.hpp"
#include "sefm/random.hpp"
#include "sefm/runner.hpp"
#include "sefm/world.hpp"

using namespace sefm;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int number, const std::string& name, bool pass, const std::string& detail) {
  if (!pass) ++g_failures;
  std::printf("%s %d %s: %s\n", pass ? "PASS" : "FAIL", number, name.c_str(), detail.c_str());
  std::fflush(stdout);
}

std::string asset(const std::string& rel) {
  return std::string(SEFM_ASSET_DIR) + "/" + rel;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

const fs::path kOutRoot = fs::temp_directory_path() / "sefm_acceptance";

// --- criteria 1 + 2: fixed-pose conditioning ---------------------------------

struct HoldOutcome {
  std::map<std::string, double> empty_rooms;    // stir_cup mass by room, gripper empty
  std::map<std::string, double> holding_rooms;  // same with gripper = spoon
};

std::vector<HoldOutcome> g_hold_runs;
double g_hold_seconds = 0.0;

RunConfig hold_config(std::uint64_t seed) {
  RunConfig cfg;
  cfg.scenario_path = asset("scenarios/apartment.scenario");
  cfg.library_path = asset("frames/apartment.frames");
  cfg.mode = RunMode::kHold;
  cfg.particles = 200;
  cfg.iterations = 20;
  cfg.seed = seed;
  return cfg;
}

void criterion_conditioning_flip() {
  const auto t0 = Clock::now();
  int empty_ok = 0;
  int holding_ok = 0;
  for (int k = 0; k < 10; ++k) {
    RunConfig cfg = hold_config(1000 + k);
    const RunResult empty = run_scenario(cfg);
    cfg.holding = "spoon";
    const RunResult holding = run_scenario(cfg);

    HoldOutcome outcome;
    outcome.empty_rooms = empty.mass_by_room.at("stir_cup");
    outcome.holding_rooms = holding.mass_by_room.at("stir_cup");
    g_hold_runs.push_back(outcome);

    const double spoon_rooms =
        outcome.empty_rooms.at("kitchen") + outcome.empty_rooms.at("dining");
    const double cup_rooms =
        outcome.holding_rooms.at("kitchen") + outcome.holding_rooms.at("living");
    if (spoon_rooms > 0.5) ++empty_ok;
    if (cup_rooms > 0.5) ++holding_ok;
  }
  g_hold_seconds = seconds_since(t0);
  const bool pass = empty_ok >= 9 && holding_ok >= 9 && g_hold_seconds < 10.0;
  report(1, "conditioning-flip", pass,
         "empty " + std::to_string(empty_ok) + "/10, holding " + std::to_string(holding_ok) +
             "/10, " + fmt(g_hold_seconds) + " s (budget 10 s)");
}

void criterion_joint_prior_bonus() {
  int ok = 0;
  for (const auto& outcome : g_hold_runs) {
    const double kitchen = outcome.empty_rooms.at("kitchen");
    if (kitchen > outcome.empty_rooms.at("dining") && kitchen > outcome.empty_rooms.at("living"))
      ++ok;
  }
  report(2, "joint-prior-bonus", ok >= 8, std::to_string(ok) + "/10 seeds");
}

// --- criterion 3: tour convergence --------------------------------------------

RunConfig tour_config(std::uint64_t seed) {
  RunConfig cfg;
  cfg.scenario_path = asset("scenarios/apartment.scenario");
  cfg.library_path = asset("frames/apartment.frames");
  cfg.mode = RunMode::kTour;
  cfg.particles = 200;
  cfg.seed = seed;
  return cfg;
}

void criterion_tour_convergence() {
  const auto t0 = Clock::now();
  int spoon_ok = 0;
  int cup_ok = 0;
  for (int k = 0; k < 10; ++k) {
    RunConfig cfg = tour_config(2000 + k);
    const RunResult empty = run_scenario(cfg);
    cfg.holding = "spoon";
    const RunResult holding = run_scenario(cfg);
    if (empty.mass_near.at("grasp_spoon").at("spoon") >= 0.7) ++spoon_ok;
    if (holding.mass_near.at("stir_cup").at("cup") >= 0.7) ++cup_ok;
  }
  const double elapsed = seconds_since(t0);
  const bool pass = spoon_ok >= 9 && cup_ok >= 9 && elapsed < 30.0;
  report(3, "tour-convergence", pass,
         "grasp_spoon " + std::to_string(spoon_ok) + "/10, stir_cup " + std::to_string(cup_ok) +
             "/10, " + fmt(elapsed) + " s (budget 30 s)");
}

// --- criterion 4: grid-oracle equivalence -------------------------------------

const char* kOracleLibrary = R"(frame prep
  verbs: prep
  element cup roles: core@0
  actions: reach
  postconditions: object_state_flag cup prepped
  permanence: static
end

frame serve
  verbs: serve
  element cup roles: core@0
  element spoon roles: other@0
  preconditions: prep
  actions: reach
  permanence: static
end
)";

struct OracleCase {
  WorldMap map;
  FrameLibrary library;
  PotentialParams params;
  gridoracle::Config cfg;
  std::map<std::string, ParticleSet> object_sets;
  std::map<std::string, ParticleSet> frame_sets;
  std::vector<double> oracle;
};

OracleCase build_oracle_case() {
  OracleCase oc;
  oc.map.bounds = Rect{{0.0, 0.0}, {10.0, 10.0}};
  oc.library = parse_frame_library(kOracleLibrary);
  oc.params.sigma_m = 1.2;
  oc.params.sigma_c = 1.2;
  oc.params.reinvigoration_fraction = 0.0;
  oc.cfg.size = 10.0;
  oc.cfg.n = 20;
  oc.cfg.sigma_m = oc.params.sigma_m;
  oc.cfg.sigma_c = oc.params.sigma_c;
  oc.cfg.subsamples = 4;

  const auto make_cluster = [](const std::string& owner, double cx, double cy,
                               gridoracle::WeightedSet& mirror) {
    ParticleSet set;
    set.owner = owner;
    int k = 0;
    double total = 0.0;
    for (int ix = 0; ix < 8; ++ix) {
      for (int iy = 0; iy < 5; ++iy) {
        const double x = cx - 0.8 + 0.2 * ix;
        const double y = cy - 0.5 + 0.25 * iy;
        const double w = 1.0 + (k * 7) % 5;
        set.positions.push_back({x, y});
        set.weights.push_back(w);
        mirror.pts.push_back({x, y});
        mirror.w.push_back(w);
        total += w;
        ++k;
      }
    }
    for (double& w : set.weights) w /= total;
    for (double& w : mirror.w) w /= total;
    return set;
  };

  gridoracle::WeightedSet cup_mirror, spoon_mirror, prep_mirror;
  oc.object_sets["cup"] = make_cluster("cup", 6.0, 4.0, cup_mirror);
  oc.object_sets["spoon"] = make_cluster("spoon", 4.0, 6.0, spoon_mirror);
  oc.frame_sets["prep"] = make_cluster("prep", 5.0, 5.0, prep_mirror);

  const std::vector<const gridoracle::WeightedSet*> coupled = {&cup_mirror, &spoon_mirror};
  oc.oracle = gridoracle::cell_posterior(oc.cfg, coupled, &prep_mirror);
  return oc;
}

std::vector<double> particle_estimate(const OracleCase& oc, std::uint64_t init_seed,
                                      std::uint64_t update_seed) {
  Rng init_rng(init_seed);
  ParticleSet prior = init_particles_from_prior(oc.map, "serve", 5000, init_rng);
  prior.owner = "serve";

  RobotState state;
  Rng rng(update_seed);
  const ParticleSet post =
      update_frame_filter(prior, oc.library.frame("serve"), oc.object_sets, oc.frame_sets,
                          state, oc.library, oc.map, oc.params, false, 0.8, rng);

  std::vector<double> est(static_cast<std::size_t>(oc.cfg.n) * oc.cfg.n, 0.0);
  const double cell = oc.cfg.size / oc.cfg.n;
  for (std::size_t i = 0; i < post.size(); ++i) {
    int ix = static_cast<int>((post.positions[i].x - oc.cfg.lo_x) / cell);
    int iy = static_cast<int>((post.positions[i].y - oc.cfg.lo_y) / cell);
    ix = std::min(std::max(ix, 0), oc.cfg.n - 1);
    iy = std::min(std::max(iy, 0), oc.cfg.n - 1);
    est[static_cast<std::size_t>(iy) * oc.cfg.n + ix] += post.weights[i];
  }
  return est;
}

void criterion_grid_oracle() {
  const auto t0 = Clock::now();
  const OracleCase oc = build_oracle_case();
  double total_tv = 0.0;
  for (int k = 0; k < 10; ++k) {
    const auto est = particle_estimate(oc, 4000 + k, 4100 + k);
    total_tv += gridoracle::total_variation(oc.oracle, est);
  }
  const double mean_tv = total_tv / 10.0;
  const double elapsed = seconds_since(t0);
  const bool pass = mean_tv <= 0.15 && elapsed < 5.0;
  report(4, "grid-oracle", pass,
         "mean TV " + fmt(mean_tv) + " (limit 0.15), " + fmt(elapsed) + " s (budget 5 s)");
}

// --- criterion 5: resampling unbiasedness -------------------------------------

ParticleSet fixed_weighted_set() {
  ParticleSet set;
  set.owner = "fixture";
  double total = 0.0;
  for (int ix = 0; ix < 10; ++ix) {
    for (int iy = 0; iy < 10; ++iy) {
      const int i = ix * 10 + iy;
      const double w = 1.0 + (i * 13) % 17;
      set.positions.push_back({0.5 + ix, 0.5 + iy});
      set.weights.push_back(w);
      total += w;
    }
  }
  for (double& w : set.weights) w /= total;
  return set;
}

struct ResampleStats {
  Vec2 overall{0.0, 0.0};
  Vec2 se{0.0, 0.0};
};

ResampleStats resample_statistics() {
  const ParticleSet set = fixed_weighted_set();
  const int calls = 1000;
  std::vector<Vec2> means;
  means.reserve(calls);
  for (int j = 0; j < calls; ++j) {
    Rng rng(derive_seed(0xACCE5501ull, "resample", j));
    const ParticleSet rs = resample(set, rng);
    Vec2 m{0.0, 0.0};
    for (const auto& p : rs.positions) m = m + p;
    means.push_back({m.x / rs.size(), m.y / rs.size()});
  }
  ResampleStats stats;
  for (const auto& m : means) stats.overall = stats.overall + m;
  stats.overall = {stats.overall.x / calls, stats.overall.y / calls};
  Vec2 var{0.0, 0.0};
  for (const auto& m : means) {
    var.x += (m.x - stats.overall.x) * (m.x - stats.overall.x);
    var.y += (m.y - stats.overall.y) * (m.y - stats.overall.y);
  }
  stats.se = {std::sqrt(var.x / (calls - 1) / calls), std::sqrt(var.y / (calls - 1) / calls)};
  return stats;
}

void criterion_resampling_unbiased() {
  const ParticleSet set = fixed_weighted_set();
  const Vec2 target = weighted_mean(set);
  const ResampleStats stats = resample_statistics();
  const double dx = std::abs(stats.overall.x - target.x);
  const double dy = std::abs(stats.overall.y - target.y);
  const bool pass = dx < 3.0 * stats.se.x && dy < 3.0 * stats.se.y;
  report(5, "resampling-unbiased", pass,
         "|dx| " + fmt(dx) + " vs 3SE " + fmt(3.0 * stats.se.x) + ", |dy| " + fmt(dy) +
             " vs 3SE " + fmt(3.0 * stats.se.y));
}

// --- criterion 6: task suite ---------------------------------------------------

SuiteReport g_suite_report;
bool g_suite_ran = false;

void criterion_task_suite() {
  const auto t0 = Clock::now();
  const SuiteConfig config = load_suite_config(asset("suites/household.json"));
  g_suite_report = run_experiment_suite(config);
  g_suite_ran = true;
  const double elapsed = seconds_since(t0);

  bool rates_ok = !g_suite_report.groups.empty();
  bool ordering_ok = true;
  std::string detail;
  for (const auto& group : g_suite_report.groups) {
    if (group.success_rate < 0.9) rates_ok = false;
    if (!group.ordering_all) ordering_ok = false;
    detail += group.name + " " + std::to_string(group.successes) + "/" +
              std::to_string(group.trials) + ", ";
  }
  const bool pass = rates_ok && ordering_ok && elapsed < 300.0;
  report(6, "task-suite", pass,
         detail + std::string(ordering_ok ? "ordering 100%" : "ORDERING VIOLATION") + ", " +
             fmt(elapsed) + " s (budget 300 s)");
}

// --- criterion 7: parser corpus ------------------------------------------------

bool frames_round_trips(const std::string& text) {
  const FrameLibrary lib = parse_frame_library(text);
  const std::string emitted = serialize_frame_library(lib);
  const FrameLibrary again = parse_frame_library(emitted);
  return serialize_frame_library(again) == emitted && again.frames().size() == lib.frames().size();
}

std::string scenario_snapshot(const World& w) {
  std::ostringstream os;
  os << w.map().rooms.size() << "|" << w.map().obstacles.size() << "|" << w.sensor().range
     << "|" << w.sensor().fov << "|" << w.sensor().sigma_z << "|" << w.sensor().miss_rate
     << "|" << w.pose_level() << "|" << w.robot().pose.x << "," << w.robot().pose.y << ","
     << w.robot().pose.heading << "|" << w.robot().gripper.value_or("-");
  for (const auto& obj : w.objects()) {
    os << "|" << obj.object_class << "@" << obj.position.x << "," << obj.position.y;
    for (const auto& f : obj.flags) os << "+" << f;
  }
  return os.str();
}

bool scenario_reloads(const std::string& text) {
  const World a = load_scenario(text, 4242);
  const World b = load_scenario(text, 4242);
  return scenario_snapshot(a) == scenario_snapshot(b);
}

void criterion_parser_corpus() {
  int valid_total = 0, valid_ok = 0;
  int invalid_total = 0, invalid_ok = 0;
  std::string first_failure;

  for (const auto& entry : fs::directory_iterator(fs::path(SEFM_CORPUS_DIR) / "valid")) {
    if (!entry.is_regular_file()) continue;
    ++valid_total;
    const std::string text = read_bytes(entry.path());
    bool ok = false;
    try {
      if (entry.path().extension() == ".frames")
        ok = frames_round_trips(text);
      else
        ok = scenario_reloads(text);
    } catch (const Error&) {
      ok = false;
    }
    if (ok)
      ++valid_ok;
    else if (first_failure.empty())
      first_failure = entry.path().filename().string();
  }

  for (const auto& entry : fs::directory_iterator(fs::path(SEFM_CORPUS_DIR) / "invalid")) {
    if (!entry.is_regular_file()) continue;
    ++invalid_total;
    const std::string text = read_bytes(entry.path());
    const std::string marker = "# expect: ";
    std::string expected;
    if (text.rfind(marker, 0) == 0)
      expected = text.substr(marker.size(), text.find('\n') - marker.size());
    bool ok = false;
    try {
      if (entry.path().extension() == ".frames")
        parse_frame_library(text);
      else
        load_scenario(text, 4242);
    } catch (const Error& e) {
      ok = !expected.empty() && e.kind() == expected;
    }
    if (ok)
      ++invalid_ok;
    else if (first_failure.empty())
      first_failure = entry.path().filename().string();
  }

  const bool pass = valid_total > 0 && invalid_total > 0 && valid_ok == valid_total &&
                    invalid_ok == invalid_total;
  std::string detail = "valid " + std::to_string(valid_ok) + "/" + std::to_string(valid_total) +
                       ", invalid " + std::to_string(invalid_ok) + "/" +
                       std::to_string(invalid_total);
  if (!first_failure.empty()) detail += ", first failure: " + first_failure;
  report(7, "parser-corpus", pass, detail);
}

// --- criterion 8: determinism ----------------------------------------------------

bool rerun_byte_identical(RunConfig cfg, const std::string& tag) {
  const fs::path dir_a = kOutRoot / (tag + "_a");
  const fs::path dir_b = kOutRoot / (tag + "_b");
  cfg.out_dir = dir_a.string();
  run_scenario(cfg);
  cfg.out_dir = dir_b.string();
  run_scenario(cfg);
  return read_bytes(dir_a / "trace.jsonl") == read_bytes(dir_b / "trace.jsonl") &&
         read_bytes(dir_a / "metrics.json") == read_bytes(dir_b / "metrics.json") &&
         !read_bytes(dir_a / "trace.jsonl").empty();
}

void criterion_determinism() {
  std::vector<std::string> broken;

  RunConfig hold = hold_config(1000);
  if (!rerun_byte_identical(hold, "hold_empty")) broken.push_back("hold");
  hold.holding = "spoon";
  if (!rerun_byte_identical(hold, "hold_holding")) broken.push_back("hold-holding");

  if (!rerun_byte_identical(tour_config(2000), "tour")) broken.push_back("tour");

  RunConfig task;
  task.scenario_path = asset("scenarios/household.scenario");
  task.library_path = asset("frames/household.frames");
  task.mode = RunMode::kTask;
  task.task = "place the spoon on the table";
  task.particles = 200;
  task.seed = 202000;
  if (!rerun_byte_identical(task, "task")) broken.push_back("task");

  const OracleCase oc = build_oracle_case();
  if (particle_estimate(oc, 4000, 4100) != particle_estimate(oc, 4000, 4100))
    broken.push_back("grid");

  const ResampleStats r1 = resample_statistics();
  const ResampleStats r2 = resample_statistics();
  if (r1.overall.x != r2.overall.x || r1.overall.y != r2.overall.y) broken.push_back("resample");

  if (g_suite_ran) {
    const SuiteConfig config = load_suite_config(asset("suites/household.json"));
    const SuiteReport again = run_experiment_suite(config);
    if (suite_report_json(again) != suite_report_json(g_suite_report)) broken.push_back("suite");
  } else {
    broken.push_back("suite-not-run");
  }

  std::string detail = "hold/tour/task traces, grid, resample, suite byte-identical";
  if (!broken.empty()) {
    detail = "mismatch:";
    for (const auto& b : broken) detail += " " + b;
  }
  report(8, "determinism", broken.empty(), detail);
}

}  // namespace

int main() {
  std::error_code ec;
  fs::remove_all(kOutRoot, ec);
  fs::create_directories(kOutRoot);

  try {
    criterion_conditioning_flip();
    criterion_joint_prior_bonus();
    criterion_tour_convergence();
    criterion_grid_oracle();
    criterion_resampling_unbiased();
    criterion_task_suite();
    criterion_parser_corpus();
    criterion_determinism();
  } catch (const std::exception& e) {
    std::printf("FAIL - acceptance aborted: %s\n", e.what());
    return 2;
  }

  std::printf("acceptance: %d/8 criteria passed\n", 8 - g_failures);
  return g_failures == 0 ? 0 : 1;
}
