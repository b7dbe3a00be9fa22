// Per-run KPIs, Monte Carlo aggregation and the CSV writers.

#ifndef MCSIM_METRICS_HPP
#define MCSIM_METRICS_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcsim/dataplane.hpp"
#include "mcsim/engine.hpp"

namespace mcsim {

class AccountingError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct KpiSummary {
  // cell identity
  std::string scenario = "default";
  Architecture architecture = Architecture::DualConnectivity;
  TttMode ttt = TttMode::Fixed;
  int l = 16;
  double crtPeriodS = 0.0;
  double udpIntervalS = 0.0;
  int runIndex = 0;
  std::uint64_t seed = 0;
  double simDurationS = 0.0;

  // procedures
  std::int64_t handovers = 0;
  std::int64_t fastSwitches = 0;
  std::int64_t schs = 0;
  std::int64_t hardHandovers = 0;
  std::int64_t initialAccesses = 0;
  double interruptionS = 0.0;
  double lteTimeS = 0.0;

  // packet accounting
  std::int64_t sent = 0;
  std::int64_t delivered = 0;
  std::int64_t droppedOverflow = 0;
  std::int64_t droppedSegmentation = 0;
  std::int64_t buffered = 0;
  std::int64_t inFlight = 0;

  double lossRatio = 0.0;       // 1 - r T_UDP / T_sim
  double lossAudit = 0.0;       // 1 - delivered / sent
  double meanLatencyS = 0.0;
  double meanThroughputBps = 0.0;
  double withinRunRvar = 0.0;
  std::int64_t rrcBytes = 0;
  double rrcBps = 0.0;
  std::int64_t x2Bytes = 0;
  double x2ThroughputBps = 0.0;
  double x2PdcpRatio = 0.0;
};

/// 1 - r * tUdp / tSim. Throws AccountingError when r exceeds the sent count.
double packetLossRatio(std::int64_t received, double tUdpS, double tSimS);

/// S(t) = bytes * 8 / tS per window over [0, tSim), from delivery timestamps.
std::vector<double> throughputSeries(const std::vector<PdcpPdu>& pdus, std::int64_t pduBytes,
                                     double tS, double tSimS);

double mean(const std::vector<double>& v);
double populationStddev(const std::vector<double>& v);

/// Population sigma over mean of per-run mean throughputs; nullopt when the
/// mean is not positive.
std::optional<double> varianceRatio(const std::vector<double>& runMeans);

struct Stat {
  double mean = 0.0;
  double stddev = 0.0;
};

struct CampaignRow {
  std::string scenario;
  Architecture architecture = Architecture::DualConnectivity;
  TttMode ttt = TttMode::Fixed;
  int l = 16;
  double crtPeriodS = 0.0;
  double udpIntervalS = 0.0;
  int runs = 0;
  Stat handovers;
  Stat lossRatio;
  Stat meanLatencyS;
  Stat throughputBps;
  Stat withinRunRvar;
  Stat rrcBps;
  Stat x2PdcpRatio;
  std::optional<double> rvar;       // across runs
  double x2PdcpRatioOfMeans = 0.0;  // E[S_X2] / E[S_PDCP]
};

/// Groups by (scenario, architecture, ttt, L, T_UDP) in order of first appearance.
std::vector<CampaignRow> aggregateCampaign(const std::vector<KpiSummary>& runs);

const CampaignRow* findCell(const std::vector<CampaignRow>& rows, const std::string& scenario,
                            Architecture a, TttMode m, int l, double udpIntervalS);

void writeRunsCsv(std::ostream& out, const std::vector<KpiSummary>& runs);
void writeCampaignCsv(std::ostream& out, const std::vector<CampaignRow>& rows);

struct SeriesRecord {
  KpiSummary identity;
  std::vector<double> series;
  double tS = 5e-3;
};
void writeThroughputSeriesCsv(std::ostream& out, const std::vector<SeriesRecord>& records);

/// Latency histogram of delivered PDUs with `binS` wide bins.
std::vector<std::int64_t> latencyHistogram(const std::vector<PdcpPdu>& pdus, double binS, int bins);

}  // namespace mcsim

#endif  // MCSIM_METRICS_HPP
