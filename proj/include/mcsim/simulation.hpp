// One Monte Carlo run: wires channel, measurement, control and data plane
// onto the event loop and returns the run's KPIs.

#ifndef MCSIM_SIMULATION_HPP
#define MCSIM_SIMULATION_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mcsim/channel.hpp"
#include "mcsim/control.hpp"
#include "mcsim/engine.hpp"
#include "mcsim/measurement.hpp"
#include "mcsim/metrics.hpp"
#include "mcsim/scenario.hpp"

namespace mcsim {

enum class ScenarioKind { Default, Corner };

const char* toString(ScenarioKind k);
ScenarioKind parseScenarioKind(const std::string& s);

struct RunSpec {
  SimConfig config;
  ScenarioKind scenario = ScenarioKind::Default;
  std::uint64_t seed = 1;
  int runIndex = 0;
  std::optional<int> traceEnbId;        // SINR trace for this mmWave eNB id
  std::optional<BlockageTrace> blockage;  // replaces the synthetic traces
  bool keepSeries = false;
  bool keepPdus = false;
  bool eventLog = false;
};

struct RunResult {
  KpiSummary kpi;
  std::vector<double> series;
  std::vector<SinrTraceRow> sinrTrace;
  std::vector<std::string> eventLog;  // "time_s,kind,source_id,target_id"
  std::vector<PdcpPdu> pdus;
  std::uint64_t firedEvents = 0;
  std::uint64_t traceHash = 0;  // FNV-1a over (time, kind, sequence) of fired events
  bool conserved = false;
};

/// Builds the geometry for a run; the default grid consumes the buildings stream.
Scenario buildScenario(ScenarioKind kind, const SimConfig& config, const RngStreams& rng);

/// Run length: sim_duration when set, else trajectory length / speed.
double runDuration(const SimConfig& config, const Scenario& scenario);

RunResult runSimulation(const RunSpec& spec);

}  // namespace mcsim

#endif  // MCSIM_SIMULATION_HPP
