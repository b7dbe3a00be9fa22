// Monte Carlo campaign: config parsing, the architecture x TTT x D x T_UDP
// grid, a worker pool, and CSV output.

#ifndef MCSIM_CAMPAIGN_HPP
#define MCSIM_CAMPAIGN_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mcsim/simulation.hpp"

namespace mcsim {

struct CampaignSpec {
  SimConfig base;
  std::vector<Architecture> architectures{Architecture::DualConnectivity, Architecture::HardHandover};
  std::vector<TttMode> ttts{TttMode::Fixed, TttMode::Dynamic};
  std::vector<int> ls{16, 2, 1};
  std::vector<double> udpIntervalsS{20e-6, 80e-6};
  ScenarioKind scenario = ScenarioKind::Default;
  int runs = 20;
  std::uint64_t baseSeed = 1;
  std::string outDir = "out";
  std::optional<std::string> blockageTracePath;
  bool writeSeries = false;
  bool writeEventLogs = false;

  /// Corner runs compare fixed and dynamic TTT under DC at T_UDP = 20 us only.
  void restrictToCorner();
  std::size_t cellCount() const {
    return architectures.size() * ttts.size() * ls.size() * udpIntervalsS.size();
  }
  void validate() const;
};

/// Campaign-level keys (runs, seed, scenario, out, blockage_trace, series,
/// event_logs, axis_architecture, axis_ttt, axis_l, axis_udp_interval) or any
/// SimConfig key.
void applyCampaignValue(CampaignSpec& spec, const std::string& key, const std::string& value);

/// Flat key=value text; '#' starts a comment. Throws ParseError / ConfigError.
CampaignSpec parseCampaignConfig(std::istream& in);
CampaignSpec loadCampaignConfig(const std::string& path);

std::vector<std::string> campaignKeys();

/// One RunSpec per (cell, run) in output order: udp, L, architecture, ttt, run.
std::vector<RunSpec> expandCampaign(const CampaignSpec& spec);

struct CampaignResult {
  std::vector<KpiSummary> runs;
  std::vector<CampaignRow> cells;
  std::vector<SeriesRecord> series;
  std::vector<std::vector<std::string>> eventLogs;
};

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

/// Runs every RunSpec on `jobs` worker threads; results are ordered as
/// expandCampaign regardless of scheduling.
CampaignResult runCampaign(const CampaignSpec& spec, int jobs, const ProgressFn& progress = {});

/// Writes runs.csv, campaign.csv and, when enabled, throughput_series.csv and
/// per-run event logs into spec.outDir. Throws ConfigError if it is not writable.
void writeCampaignOutputs(const CampaignSpec& spec, const CampaignResult& result);

/// Creates spec.outDir and checks it is writable.
void prepareOutputDir(const std::string& dir);

/// SINR trace (t, true, raw, filtered) at cadence D for one mmWave eNB, from
/// run 0 of the base configuration.
std::vector<SinrTraceRow> emitExampleTrace(const CampaignSpec& spec, int enbId);

}  // namespace mcsim

#endif  // MCSIM_CAMPAIGN_HPP
