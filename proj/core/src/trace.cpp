#include "sefm/trace.hpp"

#include <ostream>
#include <istream>

#include <nlohmann/json.hpp>

#include "sefm/error.hpp"

namespace sefm {

using json = nlohmann::ordered_json;

namespace {

json pose_json(const Pose& pose) { return json::array({pose.x, pose.y, pose.heading}); }

void emit(std::ostream& out, const json& record) { out << record.dump() << '\n'; }

}  // namespace

void TraceWriter::write_meta(const std::string& scenario, const std::string& library,
                             const std::string& mode, std::uint64_t seed, int particles) {
  json j;
  j["type"] = "meta";
  j["schema"] = kTraceSchema;
  j["scenario"] = scenario;
  j["library"] = library;
  j["mode"] = mode;
  j["seed"] = seed;
  j["particles"] = particles;
  emit(*out_, j);
}

void TraceWriter::write_belief(int step, const std::string& owner_kind,
                               const ParticleSet& set) {
  json j;
  j["type"] = "belief";
  j["step"] = step;
  j["owner"] = set.owner;
  j["owner_kind"] = owner_kind;
  j["ess"] = effective_sample_size(set);
  json positions = json::array();
  for (const auto& p : set.positions) positions.push_back(json::array({p.x, p.y}));
  j["positions"] = std::move(positions);
  j["weights"] = set.weights;
  emit(*out_, j);
}

void TraceWriter::write_event(const BeliefEvent& event) {
  json j;
  j["type"] = "event";
  j["step"] = event.step;
  j["owner"] = event.owner;
  j["kind"] = belief_event_name(event.kind);
  emit(*out_, j);
}

void TraceWriter::write_step(const StepRecord& record) {
  json j;
  j["type"] = "step";
  j["timestep"] = record.timestep;
  j["robot"] = pose_json(record.robot);
  j["active_frame"] = record.active_frame;
  j["confident"] = record.confident;
  j["goal"] = record.goal.has_value() ? pose_json(*record.goal) : json();
  j["actions"] = record.actions;
  j["completed_frame"] = record.completed_frame;
  j["moved"] = record.moved;
  j["active_mean"] = json::array({record.active_mean.x, record.active_mean.y});
  j["active_ess"] = record.active_ess;
  emit(*out_, j);
}

void TraceWriter::write_terminal(TerminalStatus status, const std::string& reason,
                                 int timesteps, double path_length) {
  json j;
  j["type"] = "terminal";
  j["status"] = terminal_status_name(status);
  j["reason"] = reason;
  j["timesteps"] = timesteps;
  j["path_length"] = path_length;
  emit(*out_, j);
}

TraceData read_trace(std::istream& in) {
  TraceData data;
  std::string line;
  bool saw_meta = false;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(errkind::kSyntax,
                  "trace line " + std::to_string(line_no) + ": " + e.what());
    }
    const std::string type = j.value("type", "");
    if (type == "meta") {
      const std::string schema = j.value("schema", "");
      if (schema != kTraceSchema)
        throw Error(errkind::kConfig, "unsupported trace schema '" + schema + "'");
      saw_meta = true;
      data.scenario = j.value("scenario", "");
      data.library = j.value("library", "");
      data.mode = j.value("mode", "");
      data.seed = j.value("seed", std::uint64_t{0});
      data.particles = j.value("particles", 0);
    } else if (type == "belief") {
      if (!saw_meta)
        throw Error(errkind::kConfig, "trace has records before its meta line");
      BeliefSnapshot snap;
      snap.step = j.value("step", 0);
      snap.owner_kind = j.value("owner_kind", "");
      snap.ess = j.value("ess", 0.0);
      snap.set.owner = j.value("owner", "");
      for (const auto& p : j.at("positions"))
        snap.set.positions.push_back(Vec2{p.at(0).get<double>(), p.at(1).get<double>()});
      snap.set.weights = j.at("weights").get<std::vector<double>>();
      if (snap.set.weights.size() != snap.set.positions.size())
        throw Error(errkind::kSyntax, "belief record with mismatched lengths");
      data.beliefs.push_back(std::move(snap));
    } else if (type == "event") {
      BeliefEvent event;
      event.step = j.value("step", 0);
      event.owner = j.value("owner", "");
      event.kind = j.value("kind", "") == "degenerate_reset"
                       ? BeliefEventKind::kDegenerateReset
                       : BeliefEventKind::kReinvigoration;
      data.events.push_back(std::move(event));
    } else if (type == "terminal") {
      data.terminal_status = j.value("status", "");
      data.terminal_timesteps = j.value("timesteps", 0);
    }
    // "step" records are replay detail; readers that need them parse the file
    // themselves. Unknown record types within a known schema are skipped.
  }
  if (!saw_meta) throw Error(errkind::kConfig, "trace has no meta record");
  return data;
}

}  // namespace sefm
