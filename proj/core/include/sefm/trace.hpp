#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "sefm/filters.hpp"
#include "sefm/particles.hpp"
#include "sefm/planner.hpp"

namespace sefm {

inline constexpr const char* kTraceSchema = "sefm-trace-v1";
inline constexpr const char* kMetricsSchema = "sefm-metrics-v1";
inline constexpr const char* kReportSchema = "sefm-report-v1";

// Streams run records as JSON lines. Key order and number formatting are
// stable, so identical runs produce identical bytes.
class TraceWriter {
 public:
  explicit TraceWriter(std::ostream& out) : out_(&out) {}

  void write_meta(const std::string& scenario, const std::string& library,
                  const std::string& mode, std::uint64_t seed, int particles);
  void write_belief(int step, const std::string& owner_kind, const ParticleSet& set);
  void write_event(const BeliefEvent& event);
  void write_step(const StepRecord& record);
  void write_terminal(TerminalStatus status, const std::string& reason, int timesteps,
                      double path_length);

 private:
  std::ostream* out_;
};

struct BeliefSnapshot {
  int step = 0;
  std::string owner_kind;  // "object" or "frame"
  ParticleSet set;
  double ess = 0.0;
};

struct TraceData {
  std::string scenario;
  std::string library;
  std::string mode;
  std::uint64_t seed = 0;
  int particles = 0;
  std::vector<BeliefSnapshot> beliefs;
  std::vector<BeliefEvent> events;
  int terminal_timesteps = 0;
  std::string terminal_status;
};

// Parses a trace stream; rejects any schema other than kTraceSchema.
TraceData read_trace(std::istream& in);

}  // namespace sefm
