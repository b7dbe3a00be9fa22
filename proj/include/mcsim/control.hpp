// Coordinator decisions (TTT, outage rules) and the timelines of fast
// switching, secondary cell handover and hard handover.

#ifndef MCSIM_CONTROL_HPP
#define MCSIM_CONTROL_HPP

#include <optional>
#include <string>
#include <vector>

#include "mcsim/channel.hpp"
#include "mcsim/engine.hpp"
#include "mcsim/measurement.hpp"

namespace mcsim {

/// Serving-cell value meaning "the LTE eNB"; mmWave cells use link indices.
constexpr int kLte = -1;

struct TttPolicy {
  TttMode mode = TttMode::Fixed;
  double fixedS = 0.150;
  double maxS = 0.150;
  double minS = 0.025;
  double deltaMinDb = 3.0;
  double deltaMaxDb = 8.0;
  /// Dynamic mode: a pending TTT runs for tttDuration(current delta) from its
  /// arming time instead of the delta seen at arming.
  bool reevaluate = true;

  static TttPolicy fromConfig(const SimConfig& c);
};

double tttDuration(double deltaDb, const TttPolicy& policy);

enum class ProcedureKind { FastSwitchToLte, FastSwitchToMmwave, Sch, HardHandover, InitialAccessLte };

const char* toString(ProcedureKind k);

struct PendingTtt {
  int target = 0;
  double armedS = 0.0;
  double expiryS = 0.0;
  double deltaDb = 0.0;
};

struct ActiveProcedure {
  ProcedureKind kind = ProcedureKind::Sch;
  int source = kLte;
  int target = kLte;
  double completeS = 0.0;
};

struct ConnectionState {
  Architecture architecture = Architecture::DualConnectivity;
  int serving = kLte;
  std::optional<PendingTtt> ttt;
  std::optional<ActiveProcedure> procedure;
  std::vector<BeamPair> bestPair;

  bool busy(double t) const { return procedure && t < procedure->completeS; }
};

enum class DecisionKind {
  NoOp,
  ArmTtt,
  CancelTtt,
  RetargetTtt,
  UpdateTtt,  // same target, new duration measured from the arming time
  FastSwitchToLte,
  FastSwitchToMmwave,
  Sch,
  HardHandover,
  InitialAccessLte,
};

const char* toString(DecisionKind k);

struct Decision {
  DecisionKind kind = DecisionKind::NoOp;
  int target = kLte;
  double tttS = 0.0;
  double deltaDb = 0.0;
};

/// Coordinator rules for UE `ueId` at time t. A stale CRT (age >= period) or
/// an in-flight procedure yields NoOp. Pending TTTs whose expiry is <= t are
/// resolved here as well.
Decision coordinatorDecide(const CompleteReportTable& crt, int ueId, const ConnectionState& state,
                           double t, const TttPolicy& policy, double retargetMarginDb = 3.0);

enum class RrcKind { ConnectionSwitch, ConnectionReconfiguration, ReconfigurationCompleted, OtherControl };
enum class RrcCarrier { LteAir, MmwaveAir };

const char* toString(RrcKind k);

struct RrcMessage {
  RrcKind kind = RrcKind::ConnectionSwitch;
  int bytes = 0;
  RrcCarrier carrier = RrcCarrier::LteAir;
};

constexpr int kReconfigurationBaseBytes = 59;
constexpr int kReconfigurationPerExtraBearerBytes = 18;
constexpr int kReconfigurationCompleteBytes = 2;
constexpr int kConnectionRequestBytes = 6;
constexpr int kConnectionSetupBytes = 24;
constexpr int kConnectionSetupCompleteBytes = 20;

RrcMessage makeRrc(RrcKind kind, int bearers, RrcCarrier carrier);
RrcMessage makeOtherControl(int bytes, RrcCarrier carrier);
int rrcTrafficBytes(const RrcMessage& msg);

struct ProcedureTiming {
  double x2S = 1e-3;
  double mmeS = 10e-3;
  double airS = 1e-3;
  double randomAccessS = 5e-3;
  double initialAccessS = 30e-3;
  double beamSearchS = 1.6e-3;
  int bearers = 1;

  static ProcedureTiming fromConfig(const SimConfig& c);
};

/// Absolute instants of one procedure. The simulation drives the data plane
/// from these; `steps` is the human-readable log.
struct ProcedurePlan {
  ProcedureKind kind = ProcedureKind::Sch;
  int source = kLte;
  int target = kLte;
  double startS = 0.0;
  double sourceStopS = 0.0;   // source air link stops serving the UE
  double forwardS = 0.0;      // source RLC content leaves over X2
  double targetServeS = 0.0;  // target air link may serve the UE
  double pathSwitchS = 0.0;   // fresh PDUs are routed to the target from here on
  double completeS = 0.0;
  bool usesMme = false;
  std::vector<RrcMessage> messages;
  std::vector<std::pair<double, std::string>> steps;

  /// User-plane interruption: no air link serves the UE in [sourceStop, targetServe).
  double interruptionS() const { return std::max(0.0, targetServeS - sourceStopS); }
};

/// Builds the timeline for `kind` starting at t. Throws ConfigError when the
/// kind does not belong to `arch` (fast switching and SCH are DC-only).
ProcedurePlan planProcedure(ProcedureKind kind, Architecture arch, int source, int target,
                            double t, const ProcedureTiming& timing);

}  // namespace mcsim

#endif  // MCSIM_CONTROL_HPP
