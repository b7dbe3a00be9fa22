#include "mcsim/simulation.hpp"

#include <cstdio>
#include <memory>

#include "mcsim/control.hpp"
#include "mcsim/dataplane.hpp"

namespace mcsim {

const char* toString(ScenarioKind k) { return k == ScenarioKind::Corner ? "corner" : "default"; }

ScenarioKind parseScenarioKind(const std::string& s) {
  if (s == "default") return ScenarioKind::Default;
  if (s == "corner") return ScenarioKind::Corner;
  throw ConfigError("invalid scenario '" + s + "': must be default or corner");
}

Scenario buildScenario(ScenarioKind kind, const SimConfig& config, const RngStreams& rng) {
  if (kind == ScenarioKind::Corner) return cornerScenario(config.ueSpeedMps);
  RandomStream buildings = rng.substream(RngStreams::kBuildings);
  return defaultScenario(buildings, config.ueSpeedMps);
}

double runDuration(const SimConfig& config, const Scenario& scenario) {
  const double path = scenario.trajectory.duration();
  if (config.simDurationS <= 0.0) return path;
  if (config.simDurationS > path * (1.0 + 1e-12))
    throw ConfigError("invalid sim_duration: must not exceed the trajectory duration (" +
                      std::to_string(path) + " s)");
  return config.simDurationS;
}

namespace {

constexpr int kNoForward = -2;

class Run {
 public:
  explicit Run(const RunSpec& spec)
      : spec_(spec),
        cfg_(spec.config),
        rng_(spec.seed),
        scenario_(buildScenario(spec.scenario, cfg_, rng_)),
        durationS_(runDuration(cfg_, scenario_)),
        channel_(cfg_, scenario_, rng_, durationS_),
        links_(channel_.links()),
        slotNs_(SimTime::fromSeconds(cfg_.slotS).ns),
        endNs_(SimTime::fromSeconds(durationS_).ns),
        crtNs_(SimTime::fromSeconds(cfg_.crtPeriodS()).ns),
        x2Ns_(SimTime::fromSeconds(cfg_.x2DelayS).ns),
        pduBytes_(cfg_.udpPayloadBytes),
        source_(cfg_.udpIntervalS, durationS_),
        x2_(cfg_.x2DelayS),
        s1_(cfg_.s1DelayS),
        receiver_(log_),
        policy_(TttPolicy::fromConfig(cfg_)),
        timing_(ProcedureTiming::fromConfig(cfg_)),
        sweep_(SweepSettings::fromConfig(cfg_)) {
    if (spec.blockage)
      for (int j = 0; j < links_; ++j) channel_.setBlockage(j, *spec.blockage);
    for (int n = 0; n <= links_; ++n) buffers_.emplace_back(cfg_.rlcBufferBytes, pduBytes_);
    forwardTo_.assign(static_cast<std::size_t>(links_ + 1), kNoForward);
    RandomStream est = rng_.substream(RngStreams::kEstimation);
    for (int j = 0; j < links_; ++j) {
      estimation_.push_back(est.derive(static_cast<std::uint64_t>(j)));
      filters_.emplace_back(cfg_.filterEta);
    }
    conn_.architecture = cfg_.architecture;
    conn_.bestPair.assign(static_cast<std::size_t>(links_), BeamPair{});
    log_.reserve(static_cast<std::size_t>(source_.totalPdus()));
    if (spec.traceEnbId) {
      for (int j = 0; j < links_; ++j)
        if (channel_.site(j).id == *spec.traceEnbId) traceLink_ = j;
      if (traceLink_ < 0)
        throw ConfigError("invalid trace-link: no mmWave eNB with id " +
                          std::to_string(*spec.traceEnbId));
    }
  }

  RunResult execute() {
    attach();
    sim_.setTraceSink([this](SimTime t, EventKind k, std::uint64_t seq) {
      mixHash(static_cast<std::uint64_t>(t.ns));
      mixHash(static_cast<std::uint64_t>(k));
      mixHash(seq);
    });
    sim_.schedule(SimTime{slotNs_}, EventKind::SlotTick, [this] { slotTick(); });
    if (crtNs_ - x2Ns_ <= endNs_)
      sim_.schedule(SimTime{crtNs_ - x2Ns_}, EventKind::SrsSweepStep, [this] { sweep(); });
    result_.firedEvents = sim_.runUntil(SimTime{endNs_});
    finish();
    return std::move(result_);
  }

 private:
  int node(int cell) const { return cell == kLte ? links_ : cell; }
  int cellId(int cell) const {
    return cell == kLte ? scenario_.geometry.sites.lte.id : channel_.site(cell).id;
  }
  double now() const { return sim_.now().seconds(); }

  void mixHash(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      hash_ ^= (v >> (8 * i)) & 0xffu;
      hash_ *= 1099511628211ull;
    }
  }

  void logEvent(const char* kind, int source, int target) {
    if (!spec_.eventLog) return;
    char buf[128];
    std::snprintf(buf, sizeof buf, "%.9f,%s,%d,%d", now(), kind, cellId(source), cellId(target));
    result_.eventLog.emplace_back(buf);
  }

  void attach() {
    const auto samples = channel_.sampleAll(0.0);
    int best = kLte;
    double bestDb = cfg_.outageThresholdDb;
    for (int j = 0; j < links_; ++j) {
      const BeamPair p = dominantPair(samples[static_cast<std::size_t>(j)]);
      const double g = pairSinrDb(samples[static_cast<std::size_t>(j)], p, channel_.params());
      conn_.bestPair[static_cast<std::size_t>(j)] = p;
      if (g >= bestDb) {
        bestDb = g;
        best = j;
      }
    }
    conn_.serving = best;
    ueCell_ = best;
    airActive_ = true;
    pdcpRoute_ = best;
    s1Route_ = best;
  }

  // ---- data plane -------------------------------------------------------

  void drop(Sn sn, PduFate fate) {
    log_[sn].fate = fate;
    if (fate == PduFate::DroppedOverflow) ++overflow_;
    else ++segmentation_;
    receiver_.lost(sn, sim_.now().ns);
  }

  void arrive(int n, Sn sn, std::int64_t atNs) {
    const int fwd = forwardTo_[static_cast<std::size_t>(n)];
    if (fwd != kNoForward) {
      x2_.send(atNs, sn, fwd, pduBytes_);
      return;
    }
    if (buffers_[static_cast<std::size_t>(n)].enqueue(sn) == EnqueueResult::DroppedOverflow)
      drop(sn, PduFate::DroppedOverflow);
  }

  void route(Sn sn, std::int64_t createdNs) {
    if (cfg_.architecture == Architecture::DualConnectivity) {
      if (pdcpRoute_ == kLte) arrive(node(kLte), sn, createdNs);
      else x2_.send(createdNs, sn, node(pdcpRoute_), pduBytes_);
    } else {
      s1_.send(createdNs, sn, node(s1Route_), pduBytes_);
    }
  }

  double servingRateBps(double t) {
    if (ueCell_ == kLte) return channel_.lteRateBps(t);
    const LinkSample s = channel_.sample(ueCell_, t);
    const double g = pairSinrDb(s, conn_.bestPair[static_cast<std::size_t>(ueCell_)], channel_.params());
    return mmwaveRateBps(g, cfg_);
  }

  void slotTick() {
    const std::int64_t nowNs = sim_.now().ns;
    source_.emitUntil(nowNs, [this](std::int64_t c) { route(log_.create(c), c); });
    auto onArrival = [this](const DelayLink::InFlight& f) { arrive(f.dest, f.sn, f.arrivalNs); };
    x2_.deliverUntil(nowNs, onArrival);
    s1_.deliverUntil(nowNs, onArrival);
    if (airActive_) {
      if (ueCell_ == kLte) lteTimeS_ += cfg_.slotS;
      RlcBuffer& buf = buffers_[static_cast<std::size_t>(node(ueCell_))];
      if (!buf.empty()) {
        const auto budget = slotBudgetBytes(servingRateBps(now()), cfg_.slotS);
        buf.serve(budget, [this, nowNs](Sn sn) { receiver_.receive(sn, nowNs); });
      }
    }
    if (nowNs + slotNs_ <= endNs_)
      sim_.schedule(SimTime{nowNs + slotNs_}, EventKind::SlotTick, [this] { slotTick(); });
  }

  // ---- measurement ------------------------------------------------------

  void sweep() {
    const double t = now();
    pendingRts_.clear();
    for (int j = 0; j < links_; ++j) {
      const LinkSample s = channel_.sample(j, t);
      auto& f = filters_[static_cast<std::size_t>(j)];
      const SweepOutcome o = sweepLink(s, channel_.params(), f,
                                       estimation_[static_cast<std::size_t>(j)], sweep_);
      ReportTable rt;
      rt.enbId = channel_.site(j).id;
      rt.sweepTimeS = t;
      rt.rows.push_back(ReportRow{0, o.filteredDb, o.pair, o.belowThreshold});
      if (j == traceLink_)
        result_.sinrTrace.push_back(SinrTraceRow{t, rt.enbId, o.trueDb, o.rawDb, o.filteredDb});
      pendingRts_.push_back(std::move(rt));
    }
    const std::int64_t crtAt = sim_.now().ns + x2Ns_;
    sim_.schedule(SimTime{crtAt}, EventKind::CrtReady, [this] { crtReady(); });
    if (crtAt + crtNs_ - x2Ns_ <= endNs_)
      sim_.schedule(SimTime{crtAt + crtNs_ - x2Ns_}, EventKind::SrsSweepStep, [this] { sweep(); });
  }

  void crtReady() {
    crt_ = assembleCrt(pendingRts_, now(), cfg_.crtPeriodS());
    haveCrt_ = true;
    if (const CrtRow* row = crt_.row(0)) {
      for (std::size_t j = 0; j < row->entries.size(); ++j)
        if (!row->entries[j].outage) conn_.bestPair[j] = row->entries[j].pair;
    }
    decide();
  }

  // ---- control ----------------------------------------------------------

  void decide() {
    if (!haveCrt_) return;
    apply(coordinatorDecide(crt_, 0, conn_, now(), policy_, cfg_.retargetMarginDb));
  }

  void clearTtt() {
    sim_.cancel(tttHandle_);
    tttHandle_ = {};
    conn_.ttt.reset();
  }

  void apply(const Decision& d) {
    switch (d.kind) {
      case DecisionKind::NoOp: return;
      case DecisionKind::CancelTtt:
        logEvent("cancel-ttt", conn_.serving, d.target);
        clearTtt();
        return;
      case DecisionKind::ArmTtt:
      case DecisionKind::RetargetTtt: {
        clearTtt();
        const SimTime expiry = sim_.now() + SimTime::fromSeconds(d.tttS);
        conn_.ttt = PendingTtt{d.target, now(), expiry.seconds(), d.deltaDb};
        tttHandle_ = sim_.schedule(expiry, EventKind::TttExpiry, [this] {
          tttHandle_ = {};
          decide();
        });
        logEvent(d.kind == DecisionKind::ArmTtt ? "arm-ttt" : "retarget-ttt", conn_.serving, d.target);
        return;
      }
      case DecisionKind::UpdateTtt: {
        sim_.cancel(tttHandle_);
        const SimTime expiry{std::max(SimTime::fromSeconds(conn_.ttt->armedS + d.tttS).ns, sim_.now().ns + 1)};
        conn_.ttt->expiryS = expiry.seconds();
        conn_.ttt->deltaDb = d.deltaDb;
        tttHandle_ = sim_.schedule(expiry, EventKind::TttExpiry, [this] {
          tttHandle_ = {};
          decide();
        });
        return;
      }
      case DecisionKind::FastSwitchToLte: start(ProcedureKind::FastSwitchToLte, kLte); return;
      case DecisionKind::FastSwitchToMmwave: start(ProcedureKind::FastSwitchToMmwave, d.target); return;
      case DecisionKind::Sch: start(ProcedureKind::Sch, d.target); return;
      case DecisionKind::HardHandover: start(ProcedureKind::HardHandover, d.target); return;
      case DecisionKind::InitialAccessLte: start(ProcedureKind::InitialAccessLte, kLte); return;
    }
  }

  void at(double s, std::function<void()> fn) {
    sim_.schedule(SimTime::fromSeconds(s), EventKind::ProcedureStep, std::move(fn));
  }

  void start(ProcedureKind kind, int target) {
    clearTtt();
    const int sourceCell = conn_.serving;
    const ProcedurePlan plan = planProcedure(kind, cfg_.architecture, sourceCell, target, now(), timing_);
    conn_.procedure = ActiveProcedure{kind, sourceCell, target, plan.completeS};
    conn_.serving = target;
    ++handovers_;
    switch (kind) {
      case ProcedureKind::FastSwitchToLte:
      case ProcedureKind::FastSwitchToMmwave: ++fastSwitches_; break;
      case ProcedureKind::Sch: ++schs_; break;
      case ProcedureKind::HardHandover: ++hardHandovers_; break;
      case ProcedureKind::InitialAccessLte: ++initialAccesses_; break;
    }
    for (const auto& m : plan.messages) rrcBytes_ += rrcTrafficBytes(m);
    interruptionS_ += plan.interruptionS();
    logEvent(toString(kind), sourceCell, target);

    const int src = node(sourceCell);
    const int dst = node(target);
    forwardTo_[static_cast<std::size_t>(dst)] = kNoForward;
    const bool dc = cfg_.architecture == Architecture::DualConnectivity;
    auto pathSwitch = [this, dc, target] {
      if (dc) pdcpRoute_ = target;
      else s1Route_ = target;
    };
    if (plan.pathSwitchS <= plan.startS) pathSwitch();
    else at(plan.pathSwitchS, pathSwitch);
    at(plan.sourceStopS, [this, sourceCell] {
      if (ueCell_ == sourceCell) airActive_ = false;
    });
    at(plan.forwardS, [this, src, dst] {
      RlcBuffer::Drained d = buffers_[static_cast<std::size_t>(src)].drainForForwarding();
      if (d.partial) drop(*d.partial, PduFate::DroppedSegmentation);
      for (Sn sn : d.whole) x2_.send(sim_.now().ns, sn, dst, pduBytes_);
      forwardTo_[static_cast<std::size_t>(src)] = dst;
    });
    at(plan.targetServeS, [this, target] {
      ueCell_ = target;
      airActive_ = true;
    });
    at(plan.completeS, [this] { conn_.procedure.reset(); });
  }

  // ---- wrap-up ----------------------------------------------------------

  void finish() {
    KpiSummary& k = result_.kpi;
    k.scenario = toString(spec_.scenario);
    k.architecture = cfg_.architecture;
    k.ttt = cfg_.tttMode;
    k.l = cfg_.rxParallelism;
    k.crtPeriodS = cfg_.crtPeriodS();
    k.udpIntervalS = cfg_.udpIntervalS;
    k.runIndex = spec_.runIndex;
    k.seed = spec_.seed;
    k.simDurationS = durationS_;
    k.handovers = handovers_;
    k.fastSwitches = fastSwitches_;
    k.schs = schs_;
    k.hardHandovers = hardHandovers_;
    k.initialAccesses = initialAccesses_;
    k.interruptionS = interruptionS_;
    k.lteTimeS = lteTimeS_;

    std::int64_t delivered = 0;
    double latencySum = 0.0;
    for (const auto& p : log_.all()) {
      if (p.fate != PduFate::Delivered) continue;
      ++delivered;
      latencySum += static_cast<double>(p.deliveredNs - p.createdNs) * 1e-9;
    }
    std::int64_t buffered = 0;
    for (const auto& b : buffers_) buffered += static_cast<std::int64_t>(b.size());
    k.sent = static_cast<std::int64_t>(log_.size());
    k.delivered = delivered;
    k.droppedOverflow = overflow_;
    k.droppedSegmentation = segmentation_;
    k.buffered = buffered;
    k.inFlight = static_cast<std::int64_t>(x2_.inFlight() + s1_.inFlight() + receiver_.held());
    result_.conserved =
        k.sent == k.delivered + k.droppedOverflow + k.droppedSegmentation + k.buffered + k.inFlight;
    if (!result_.conserved) throw AccountingError("packet conservation violated");

    k.lossRatio = packetLossRatio(delivered, cfg_.udpIntervalS, durationS_);
    k.lossAudit = k.sent > 0 ? 1.0 - static_cast<double>(delivered) / static_cast<double>(k.sent) : 0.0;
    k.meanLatencyS = delivered > 0 ? latencySum / static_cast<double>(delivered) : 0.0;
    const auto series = throughputSeries(log_.all(), pduBytes_, cfg_.throughputSampleS, durationS_);
    k.meanThroughputBps = static_cast<double>(delivered * pduBytes_) * 8.0 / durationS_;
    const double sm = mean(series);
    k.withinRunRvar = sm > 0.0 ? populationStddev(series) / sm : 0.0;
    k.rrcBytes = rrcBytes_;
    k.rrcBps = static_cast<double>(rrcBytes_) * 8.0 / durationS_;
    k.x2Bytes = x2_.bytesCarried();
    k.x2ThroughputBps = static_cast<double>(k.x2Bytes) * 8.0 / durationS_;
    k.x2PdcpRatio = k.meanThroughputBps > 0.0 ? k.x2ThroughputBps / k.meanThroughputBps : 0.0;

    if (spec_.keepSeries) result_.series = series;
    if (spec_.keepPdus) result_.pdus = log_.all();
    result_.traceHash = hash_;
  }

  RunSpec spec_;
  SimConfig cfg_;
  RngStreams rng_;
  Scenario scenario_;
  double durationS_;
  ChannelModel channel_;
  int links_;
  std::int64_t slotNs_;
  std::int64_t endNs_;
  std::int64_t crtNs_;
  std::int64_t x2Ns_;
  std::int64_t pduBytes_;

  Simulator sim_;
  PduLog log_;
  UdpSource source_;
  std::vector<RlcBuffer> buffers_;
  std::vector<int> forwardTo_;
  DelayLink x2_;
  DelayLink s1_;
  PdcpReceiver receiver_;

  TttPolicy policy_;
  ProcedureTiming timing_;
  SweepSettings sweep_;
  std::vector<RandomStream> estimation_;
  std::vector<FilterState> filters_;
  std::vector<ReportTable> pendingRts_;
  CompleteReportTable crt_;
  bool haveCrt_ = false;
  ConnectionState conn_;
  EventHandle tttHandle_;
  int traceLink_ = -1;

  int ueCell_ = kLte;
  bool airActive_ = true;
  int pdcpRoute_ = kLte;
  int s1Route_ = kLte;

  std::int64_t handovers_ = 0;
  std::int64_t fastSwitches_ = 0;
  std::int64_t schs_ = 0;
  std::int64_t hardHandovers_ = 0;
  std::int64_t initialAccesses_ = 0;
  std::int64_t overflow_ = 0;
  std::int64_t segmentation_ = 0;
  std::int64_t rrcBytes_ = 0;
  double interruptionS_ = 0.0;
  double lteTimeS_ = 0.0;
  std::uint64_t hash_ = 14695981039346656037ull;
  RunResult result_;
};

}  // namespace

RunResult runSimulation(const RunSpec& spec) {
  spec.config.validate();
  auto run = std::make_unique<Run>(spec);
  return run->execute();
}

}  // namespace mcsim
