#include "mcsim/control.hpp"

#include <algorithm>
#include <cmath>

namespace mcsim {

TttPolicy TttPolicy::fromConfig(const SimConfig& c) {
  return TttPolicy{c.tttMode,       c.tttFixedS,     c.tttMaxS,      c.tttMinS,
                   c.tttDeltaMinDb, c.tttDeltaMaxDb, c.tttReevaluate};
}

double tttDuration(double deltaDb, const TttPolicy& p) {
  if (p.mode == TttMode::Fixed) return p.fixedS;
  const double f = (deltaDb - p.deltaMinDb) / (p.deltaMaxDb - p.deltaMinDb);
  return std::clamp(p.maxS - f * (p.maxS - p.minS), p.minS, p.maxS);
}

const char* toString(ProcedureKind k) {
  switch (k) {
    case ProcedureKind::FastSwitchToLte: return "fast-switch-to-lte";
    case ProcedureKind::FastSwitchToMmwave: return "fast-switch-to-mmwave";
    case ProcedureKind::Sch: return "sch";
    case ProcedureKind::HardHandover: return "hard-handover";
    case ProcedureKind::InitialAccessLte: return "initial-access-lte";
  }
  return "?";
}

const char* toString(DecisionKind k) {
  switch (k) {
    case DecisionKind::NoOp: return "no-op";
    case DecisionKind::ArmTtt: return "arm-ttt";
    case DecisionKind::CancelTtt: return "cancel-ttt";
    case DecisionKind::RetargetTtt: return "retarget-ttt";
    case DecisionKind::UpdateTtt: return "update-ttt";
    case DecisionKind::FastSwitchToLte: return "fast-switch-to-lte";
    case DecisionKind::FastSwitchToMmwave: return "fast-switch-to-mmwave";
    case DecisionKind::Sch: return "sch";
    case DecisionKind::HardHandover: return "hard-handover";
    case DecisionKind::InitialAccessLte: return "initial-access-lte";
  }
  return "?";
}

const char* toString(RrcKind k) {
  switch (k) {
    case RrcKind::ConnectionSwitch: return "connection-switch";
    case RrcKind::ConnectionReconfiguration: return "connection-reconfiguration";
    case RrcKind::ReconfigurationCompleted: return "reconfiguration-completed";
    case RrcKind::OtherControl: return "other-control";
  }
  return "?";
}

Decision coordinatorDecide(const CompleteReportTable& crt, int ueId, const ConnectionState& state,
                           double t, const TttPolicy& policy, double retargetMarginDb) {
  Decision none;
  if (t - crt.generationTimeS >= crt.periodS) return none;
  if (state.busy(t)) return none;
  const CrtRow* row = crt.row(ueId);
  if (!row) return none;
  const auto& e = row->entries;
  const int n = static_cast<int>(e.size());
  auto available = [&](int j) { return j >= 0 && j < n && !e[static_cast<std::size_t>(j)].outage; };
  auto sinr = [&](int j) { return e[static_cast<std::size_t>(j)].sinrDb; };

  int best = kLte;
  for (int j = 0; j < n; ++j)
    if (available(j) && (best == kLte || sinr(j) > sinr(best))) best = j;
  const bool dc = state.architecture == Architecture::DualConnectivity;

  // (a) every mmWave cell in outage
  if (best == kLte) {
    if (state.serving == kLte) return none;
    return Decision{dc ? DecisionKind::FastSwitchToLte : DecisionKind::InitialAccessLte, kLte};
  }
  // (c) back from LTE
  if (state.serving == kLte)
    return Decision{dc ? DecisionKind::FastSwitchToMmwave : DecisionKind::HardHandover, best};
  // (b) serving cell lost, another one usable: no TTT
  if (!available(state.serving))
    return Decision{dc ? DecisionKind::Sch : DecisionKind::HardHandover, best};

  const double serving = sinr(state.serving);
  if (state.ttt) {
    const PendingTtt& p = *state.ttt;
    // (e) expiry
    if (t >= p.expiryS) {
      if (available(p.target) && sinr(p.target) > serving && p.target != state.serving)
        return Decision{dc ? DecisionKind::Sch : DecisionKind::HardHandover, p.target};
      return Decision{DecisionKind::CancelTtt, p.target};
    }
    if (best == state.serving || sinr(best) <= serving) return Decision{DecisionKind::CancelTtt, p.target};
    if (!available(p.target) || sinr(best) - sinr(p.target) >= retargetMarginDb) {
      if (best == p.target) return none;
      const double delta = sinr(best) - serving;
      return Decision{DecisionKind::RetargetTtt, best, tttDuration(delta, policy), delta};
    }
    if (policy.reevaluate && policy.mode == TttMode::Dynamic && available(p.target) &&
        sinr(p.target) > serving) {
      const double delta = sinr(p.target) - serving;
      const double ttt = tttDuration(delta, policy);
      if (t >= p.armedS + ttt) return Decision{dc ? DecisionKind::Sch : DecisionKind::HardHandover, p.target};
      if (std::abs(p.armedS + ttt - p.expiryS) > 1e-9)
        return Decision{DecisionKind::UpdateTtt, p.target, ttt, delta};
    }
    return none;
  }
  // (d) a better cell appeared
  if (best != state.serving && sinr(best) > serving) {
    const double delta = sinr(best) - serving;
    return Decision{DecisionKind::ArmTtt, best, tttDuration(delta, policy), delta};
  }
  return none;
}

RrcMessage makeRrc(RrcKind kind, int bearers, RrcCarrier carrier) {
  const int b = std::max(1, bearers);
  RrcMessage m{kind, 0, carrier};
  switch (kind) {
    case RrcKind::ConnectionSwitch: m.bytes = b; break;
    case RrcKind::ConnectionReconfiguration:
      m.bytes = kReconfigurationBaseBytes + kReconfigurationPerExtraBearerBytes * (b - 1);
      break;
    case RrcKind::ReconfigurationCompleted: m.bytes = kReconfigurationCompleteBytes; break;
    case RrcKind::OtherControl: m.bytes = 0; break;
  }
  return m;
}

RrcMessage makeOtherControl(int bytes, RrcCarrier carrier) {
  return RrcMessage{RrcKind::OtherControl, bytes, carrier};
}

int rrcTrafficBytes(const RrcMessage& msg) { return msg.bytes; }

ProcedureTiming ProcedureTiming::fromConfig(const SimConfig& c) {
  ProcedureTiming t;
  t.x2S = c.x2DelayS;
  t.mmeS = c.mmeDelayS;
  t.airS = c.lteAirLatencyS;
  t.randomAccessS = c.randomAccessS;
  t.initialAccessS = c.initialAccessS;
  t.beamSearchS = c.crtPeriodS();
  t.bearers = c.bearers;
  return t;
}

ProcedurePlan planProcedure(ProcedureKind kind, Architecture arch, int source, int target,
                            double t, const ProcedureTiming& d) {
  const bool dc = arch == Architecture::DualConnectivity;
  const bool dcOnly = kind == ProcedureKind::FastSwitchToLte ||
                      kind == ProcedureKind::FastSwitchToMmwave || kind == ProcedureKind::Sch;
  if (dcOnly != dc)
    throw ConfigError(std::string("procedure ") + toString(kind) + " is not valid under " +
                      toString(arch));
  ProcedurePlan p;
  p.kind = kind;
  p.source = source;
  p.target = target;
  p.startS = t;
  auto step = [&](double at, const std::string& what) { p.steps.emplace_back(at, what); };
  const RrcCarrier serveAir = source == kLte ? RrcCarrier::LteAir : RrcCarrier::MmwaveAir;
  const RrcCarrier targetAir = target == kLte ? RrcCarrier::LteAir : RrcCarrier::MmwaveAir;

  switch (kind) {
    case ProcedureKind::FastSwitchToLte:
      p.pathSwitchS = t;
      p.sourceStopS = t + d.airS;
      p.targetServeS = t + d.airS;
      p.forwardS = std::max(t + d.x2S, p.sourceStopS);
      p.completeS = p.forwardS + d.x2S;
      p.messages.push_back(makeRrc(RrcKind::ConnectionSwitch, d.bearers, RrcCarrier::LteAir));
      step(t, "pdcp-switch-to-lte");
      step(p.targetServeS, "ue-switch");
      step(p.forwardS, "forward-rlc");
      break;
    case ProcedureKind::FastSwitchToMmwave:
      p.pathSwitchS = t;
      p.sourceStopS = t + d.airS;
      p.targetServeS = t + d.airS;
      p.forwardS = p.sourceStopS;
      p.completeS = p.forwardS + d.x2S;
      p.messages.push_back(makeRrc(RrcKind::ConnectionSwitch, d.bearers, RrcCarrier::LteAir));
      step(t, "pdcp-switch-to-mmwave");
      step(p.targetServeS, "ue-switch");
      step(p.forwardS, "forward-rlc");
      break;
    case ProcedureKind::Sch: {
      const double ack = t + 3.0 * d.x2S;  // request, handover request, ack
      p.sourceStopS = ack;
      p.forwardS = ack;
      p.targetServeS = ack + d.airS + d.randomAccessS;
      p.pathSwitchS = p.targetServeS + d.airS;
      p.completeS = p.pathSwitchS + d.x2S;
      p.messages.push_back(makeRrc(RrcKind::ConnectionReconfiguration, d.bearers, RrcCarrier::LteAir));
      p.messages.push_back(makeRrc(RrcKind::ReconfigurationCompleted, d.bearers, RrcCarrier::LteAir));
      step(t, "sch-request");
      step(t + d.x2S, "handover-request");
      step(ack, "handover-ack");
      step(ack + d.airS, "rrc-reconfiguration");
      step(p.targetServeS, "random-access-done");
      step(p.pathSwitchS, "path-switch");
      step(p.completeS, "remove-ue-context");
      break;
    }
    case ProcedureKind::HardHandover: {
      p.usesMme = true;
      p.sourceStopS = t;
      p.forwardS = t + 2.0 * d.x2S;
      const double access = target == kLte ? d.randomAccessS : d.beamSearchS + d.randomAccessS;
      p.targetServeS = p.forwardS + d.airS + access;
      p.pathSwitchS = p.targetServeS + d.mmeS;
      p.completeS = p.targetServeS + 2.0 * d.mmeS;
      p.messages.push_back(makeRrc(RrcKind::ConnectionReconfiguration, d.bearers, serveAir));
      p.messages.push_back(makeRrc(RrcKind::ReconfigurationCompleted, d.bearers, targetAir));
      step(t, "handover-request");
      step(p.forwardS, "rrc-reconfiguration");
      step(p.targetServeS, "target-access-done");
      step(p.pathSwitchS, "mme-path-switch");
      step(p.completeS, "path-switch-ack");
      break;
    }
    case ProcedureKind::InitialAccessLte:
      p.usesMme = true;
      p.sourceStopS = t;
      p.targetServeS = t + d.initialAccessS;
      p.forwardS = p.targetServeS + d.x2S;  // context fetch from the old cell
      p.pathSwitchS = p.targetServeS + d.mmeS;
      p.completeS = p.targetServeS + 2.0 * d.mmeS;
      p.messages.push_back(makeOtherControl(kConnectionRequestBytes, RrcCarrier::LteAir));
      p.messages.push_back(makeOtherControl(kConnectionSetupBytes, RrcCarrier::LteAir));
      p.messages.push_back(makeOtherControl(kConnectionSetupCompleteBytes, RrcCarrier::LteAir));
      p.messages.push_back(makeRrc(RrcKind::ConnectionReconfiguration, d.bearers, RrcCarrier::LteAir));
      p.messages.push_back(makeRrc(RrcKind::ReconfigurationCompleted, d.bearers, RrcCarrier::LteAir));
      step(t, "connection-lost");
      step(p.targetServeS, "lte-access-done");
      step(p.pathSwitchS, "mme-path-switch");
      step(p.completeS, "path-switch-ack");
      break;
  }
  return p;
}

}  // namespace mcsim
