#include "mcsim/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

namespace mcsim {

double packetLossRatio(std::int64_t received, double tUdpS, double tSimS) {
  if (!(tUdpS > 0.0) || !(tSimS > 0.0)) throw DomainError("T_UDP and T_sim must be > 0");
  const double sent = std::floor(tSimS / tUdpS * (1.0 + 1e-12));
  if (received < 0 || static_cast<double>(received) > sent)
    throw AccountingError("received count " + std::to_string(received) + " exceeds sent count");
  return 1.0 - static_cast<double>(received) * tUdpS / tSimS;
}

std::vector<double> throughputSeries(const std::vector<PdcpPdu>& pdus, std::int64_t pduBytes,
                                     double tS, double tSimS) {
  const auto windows = static_cast<std::size_t>(std::ceil(tSimS / tS - 1e-9));
  std::vector<double> s(windows, 0.0);
  const auto tSns = SimTime::fromSeconds(tS).ns;
  for (const auto& p : pdus) {
    if (p.fate != PduFate::Delivered) continue;
    auto w = static_cast<std::size_t>(p.deliveredNs / tSns);
    if (w >= windows) w = windows - 1;  // delivery stamped exactly at T_sim
    s[w] += static_cast<double>(pduBytes) * 8.0 / tS;
  }
  return s;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

double populationStddev(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const double m = mean(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

std::optional<double> varianceRatio(const std::vector<double>& runMeans) {
  const double m = mean(runMeans);
  if (!(m > 0.0)) return std::nullopt;
  return populationStddev(runMeans) / m;
}

namespace {

Stat statOf(const std::vector<KpiSummary>& runs, double KpiSummary::*field) {
  std::vector<double> v;
  for (const auto& r : runs) v.push_back(r.*field);
  return Stat{mean(v), populationStddev(v)};
}

bool sameCell(const KpiSummary& a, const CampaignRow& r) {
  return a.scenario == r.scenario && a.architecture == r.architecture && a.ttt == r.ttt &&
         a.l == r.l && std::abs(a.udpIntervalS - r.udpIntervalS) < 1e-12;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

std::vector<CampaignRow> aggregateCampaign(const std::vector<KpiSummary>& runs) {
  std::vector<CampaignRow> rows;
  std::vector<std::vector<KpiSummary>> groups;
  for (const auto& r : runs) {
    std::size_t g = 0;
    while (g < rows.size() && !sameCell(r, rows[g])) ++g;
    if (g == rows.size()) {
      CampaignRow row;
      row.scenario = r.scenario;
      row.architecture = r.architecture;
      row.ttt = r.ttt;
      row.l = r.l;
      row.crtPeriodS = r.crtPeriodS;
      row.udpIntervalS = r.udpIntervalS;
      rows.push_back(row);
      groups.emplace_back();
    }
    groups[g].push_back(r);
  }
  for (std::size_t g = 0; g < rows.size(); ++g) {
    const auto& runsG = groups[g];
    CampaignRow& row = rows[g];
    row.runs = static_cast<int>(runsG.size());
    std::vector<double> ho;
    std::vector<double> thr;
    double x2 = 0.0;
    for (const auto& r : runsG) {
      ho.push_back(static_cast<double>(r.handovers));
      thr.push_back(r.meanThroughputBps);
      x2 += r.x2ThroughputBps;
    }
    row.handovers = Stat{mean(ho), populationStddev(ho)};
    row.lossRatio = statOf(runsG, &KpiSummary::lossRatio);
    row.meanLatencyS = statOf(runsG, &KpiSummary::meanLatencyS);
    row.throughputBps = Stat{mean(thr), populationStddev(thr)};
    row.withinRunRvar = statOf(runsG, &KpiSummary::withinRunRvar);
    row.rrcBps = statOf(runsG, &KpiSummary::rrcBps);
    row.x2PdcpRatio = statOf(runsG, &KpiSummary::x2PdcpRatio);
    row.rvar = varianceRatio(thr);
    const double meanThr = mean(thr);
    row.x2PdcpRatioOfMeans = meanThr > 0.0 ? (x2 / static_cast<double>(runsG.size())) / meanThr : 0.0;
  }
  return rows;
}

const CampaignRow* findCell(const std::vector<CampaignRow>& rows, const std::string& scenario,
                            Architecture a, TttMode m, int l, double udpIntervalS) {
  for (const auto& r : rows) {
    if (r.scenario == scenario && r.architecture == a && r.ttt == m && r.l == l &&
        std::abs(r.udpIntervalS - udpIntervalS) < 1e-12)
      return &r;
  }
  return nullptr;
}

void writeRunsCsv(std::ostream& out, const std::vector<KpiSummary>& runs) {
  out << "scenario,architecture,ttt,l,crt_period_s,udp_interval_s,run,seed,sim_duration_s,"
         "handovers,fast_switches,schs,hard_handovers,initial_accesses,interruption_s,lte_time_s,"
         "sent,delivered,dropped_overflow,dropped_segmentation,buffered,in_flight,"
         "loss_ratio,loss_audit,mean_latency_s,mean_throughput_bps,within_run_rvar,"
         "rrc_bytes,rrc_bps,x2_bytes,x2_throughput_bps,x2_pdcp_ratio\n";
  for (const auto& r : runs) {
    out << r.scenario << ',' << toString(r.architecture) << ',' << toString(r.ttt) << ',' << r.l
        << ',' << num(r.crtPeriodS) << ',' << num(r.udpIntervalS) << ',' << r.runIndex << ','
        << r.seed << ',' << num(r.simDurationS) << ',' << r.handovers << ',' << r.fastSwitches
        << ',' << r.schs << ',' << r.hardHandovers << ',' << r.initialAccesses << ','
        << num(r.interruptionS) << ',' << num(r.lteTimeS) << ',' << r.sent << ',' << r.delivered
        << ',' << r.droppedOverflow << ',' << r.droppedSegmentation << ',' << r.buffered << ','
        << r.inFlight << ',' << num(r.lossRatio) << ',' << num(r.lossAudit) << ','
        << num(r.meanLatencyS) << ',' << num(r.meanThroughputBps) << ',' << num(r.withinRunRvar)
        << ',' << r.rrcBytes << ',' << num(r.rrcBps) << ',' << r.x2Bytes << ','
        << num(r.x2ThroughputBps) << ',' << num(r.x2PdcpRatio) << '\n';
  }
}

void writeCampaignCsv(std::ostream& out, const std::vector<CampaignRow>& rows) {
  out << "scenario,architecture,ttt,l,crt_period_s,udp_interval_s,runs,"
         "handovers_mean,handovers_std,loss_ratio_mean,loss_ratio_std,"
         "latency_mean_s,latency_std_s,throughput_mean_bps,throughput_std_bps,rvar,"
         "within_run_rvar_mean,within_run_rvar_std,rrc_bps_mean,rrc_bps_std,"
         "x2_pdcp_ratio,x2_pdcp_ratio_run_mean,x2_pdcp_ratio_run_std\n";
  for (const auto& r : rows) {
    out << r.scenario << ',' << toString(r.architecture) << ',' << toString(r.ttt) << ',' << r.l
        << ',' << num(r.crtPeriodS) << ',' << num(r.udpIntervalS) << ',' << r.runs << ','
        << num(r.handovers.mean) << ',' << num(r.handovers.stddev) << ','
        << num(r.lossRatio.mean) << ',' << num(r.lossRatio.stddev) << ','
        << num(r.meanLatencyS.mean) << ',' << num(r.meanLatencyS.stddev) << ','
        << num(r.throughputBps.mean) << ',' << num(r.throughputBps.stddev) << ','
        << (r.rvar ? num(*r.rvar) : std::string("NA")) << ',' << num(r.withinRunRvar.mean) << ','
        << num(r.withinRunRvar.stddev) << ',' << num(r.rrcBps.mean) << ','
        << num(r.rrcBps.stddev) << ',' << num(r.x2PdcpRatioOfMeans) << ','
        << num(r.x2PdcpRatio.mean) << ',' << num(r.x2PdcpRatio.stddev) << '\n';
  }
}

void writeThroughputSeriesCsv(std::ostream& out, const std::vector<SeriesRecord>& records) {
  out << "scenario,architecture,ttt,l,udp_interval_s,run,time_s,throughput_bps\n";
  for (const auto& rec : records) {
    const auto& r = rec.identity;
    for (std::size_t k = 0; k < rec.series.size(); ++k) {
      out << r.scenario << ',' << toString(r.architecture) << ',' << toString(r.ttt) << ',' << r.l
          << ',' << num(r.udpIntervalS) << ',' << r.runIndex << ','
          << num(static_cast<double>(k) * rec.tS) << ',' << num(rec.series[k]) << '\n';
    }
  }
}

std::vector<std::int64_t> latencyHistogram(const std::vector<PdcpPdu>& pdus, double binS, int bins) {
  std::vector<std::int64_t> h(static_cast<std::size_t>(std::max(1, bins)), 0);
  for (const auto& p : pdus) {
    const auto lat = p.latencyS();
    if (!lat) continue;
    auto b = static_cast<std::size_t>(*lat / binS);
    if (b >= h.size()) b = h.size() - 1;
    ++h[b];
  }
  return h;
}

}  // namespace mcsim
