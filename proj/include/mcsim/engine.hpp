// Discrete-event core: virtual clock, cancellable event queue, seeded random
// substreams.

#ifndef MCSIM_ENGINE_HPP
#define MCSIM_ENGINE_HPP

#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <queue>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace mcsim {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Virtual time, stored as integer nanoseconds.
struct SimTime {
  std::int64_t ns = 0;

  static constexpr SimTime fromNanos(std::int64_t n) { return SimTime{n}; }
  static SimTime fromSeconds(double s) { return SimTime{std::llround(s * 1e9)}; }
  constexpr double seconds() const { return static_cast<double>(ns) * 1e-9; }

  constexpr auto operator<=>(const SimTime&) const = default;
  constexpr SimTime operator+(SimTime o) const { return SimTime{ns + o.ns}; }
  constexpr SimTime operator-(SimTime o) const { return SimTime{ns - o.ns}; }
  constexpr SimTime& operator+=(SimTime o) {
    ns += o.ns;
    return *this;
  }
  constexpr SimTime operator*(std::int64_t k) const { return SimTime{ns * k}; }
};

enum class EventKind : std::uint8_t {
  SlotTick,
  SrsSweepStep,
  CrtReady,
  TttExpiry,
  PacketArrival,
  LinkService,
  X2Delivery,
  MmeDelivery,
  ProcedureStep,
};

const char* toString(EventKind kind);

struct EventHandle {
  std::uint64_t sequence = 0;
  bool valid() const { return sequence != 0; }
};

struct SimEvent {
  SimTime fireTime;
  std::uint64_t sequence;
  EventKind kind;
  std::function<void()> payload;
};

/// Single-threaded event loop. Events at equal times fire in scheduling order.
class Simulator {
 public:
  using TraceSink = std::function<void(SimTime, EventKind, std::uint64_t)>;

  SimTime now() const { return clock_; }

  /// Throws ConfigError when `at` lies before the current clock.
  EventHandle schedule(SimTime at, EventKind kind, std::function<void()> payload);
  EventHandle scheduleIn(SimTime delay, EventKind kind, std::function<void()> payload) {
    return schedule(clock_ + delay, kind, std::move(payload));
  }

  /// Cancelling an already-fired or unknown handle is a no-op.
  void cancel(EventHandle handle);

  /// Fires every event with fireTime <= end and leaves the clock at `end`.
  std::uint64_t runUntil(SimTime end);

  std::size_t pending() const { return queue_.size() - cancelled_.size(); }

  void setTraceSink(TraceSink sink) { trace_ = std::move(sink); }

 private:
  struct Later {
    bool operator()(const SimEvent& a, const SimEvent& b) const {
      if (a.fireTime != b.fireTime) return a.fireTime > b.fireTime;
      return a.sequence > b.sequence;
    }
  };

  SimTime clock_{};
  std::uint64_t nextSequence_ = 1;
  std::priority_queue<SimEvent, std::vector<SimEvent>, Later> queue_;
  std::unordered_set<std::uint64_t> cancelled_;
  std::unordered_set<std::uint64_t> live_;
  TraceSink trace_;
};

/// A reproducible pseudo-random stream. Copyable; copies continue identically.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed = 0);

  std::uint64_t seed() const { return seed_; }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  double normal(double mean = 0.0, double sigma = 1.0) {
    return std::normal_distribution<double>(mean, sigma)(engine_);
  }
  double exponential(double mean) {
    return std::exponential_distribution<double>(1.0 / mean)(engine_);
  }
  std::uint64_t next() { return engine_(); }

  /// Independent child stream keyed by `index`; does not advance this stream.
  RandomStream derive(std::uint64_t index) const;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// Named substreams derived from one master seed.
class RngStreams {
 public:
  static constexpr std::string_view kBuildings = "buildings";
  static constexpr std::string_view kFading = "fading";
  static constexpr std::string_view kBlockage = "blockage";
  static constexpr std::string_view kEstimation = "estimation";

  explicit RngStreams(std::uint64_t masterSeed) : masterSeed_(masterSeed) {}

  std::uint64_t masterSeed() const { return masterSeed_; }

  /// Output depends only on (masterSeed, name). Unknown names throw ConfigError.
  RandomStream substream(std::string_view name) const;

 private:
  std::uint64_t masterSeed_;
};

std::uint64_t mixSeed(std::uint64_t a, std::uint64_t b);

enum class Architecture { DualConnectivity, HardHandover };
enum class TttMode { Fixed, Dynamic };

const char* toString(Architecture a);
const char* toString(TttMode m);

/// Every tunable of a single run. Defaults reproduce the reference setup.
struct SimConfig {
  // mmWave radio
  double mmwaveBandwidthHz = 1e9;
  double mmwaveCarrierHz = 28e9;
  double mmwaveTxPowerDbm = 30.0;
  double noiseFigureDb = 5.0;
  double outageThresholdDb = -5.0;
  int enbArrayRows = 8;
  int enbArrayCols = 8;
  int ueArrayRows = 4;
  int ueArrayCols = 4;
  int enbDirections = 16;
  int ueDirections = 8;
  double sidelobeGainDb = -10.0;
  double spectralEfficiencyMax = 4.8;

  // LTE radio
  double lteBandwidthHz = 20e6;
  double lteCarrierHz = 2.1e9;
  double lteDlTxPowerDbm = 30.0;
  double lteUlTxPowerDbm = 25.0;
  double lteOverhead = 0.0;

  // SRS measurement framework
  double srsDurationS = 10e-6;
  double srsPeriodS = 200e-6;
  double srsOverhead = 0.05;
  int rxParallelism = 16;  // L

  // channel
  double pathlossAlphaLos = 61.4;
  double pathlossBetaLos = 2.0;
  double pathlossAlphaNlos = 72.0;
  double pathlossBetaNlos = 2.92;
  double shadowingLosDb = 4.0;
  double shadowingNlosDb = 7.0;
  double largeScalePeriodS = 0.1;
  double fastFadingClipDb = 15.0;
  double ricianKLosDb = 10.0;
  double ricianKNlosDb = 0.0;
  int fadingSinusoids = 8;
  int clusters = 3;
  bool nlosPathlossInStatistical = true;
  double blockageDecayDbPerMs = 0.2;
  double blockageDepthMinDb = -40.0;
  double blockageDepthMaxDb = -25.0;
  double blockageMeanGapS = 3.0;
  double blockageMeanDwellS = 1.0;

  // estimation and filtering
  bool estimationNoise = true;
  double estimationSigmaLowDb = 3.0;
  double estimationSigmaHighDb = 0.5;
  double filterEta = 0.25;

  // mobility
  double ueSpeedMps = 5.0;
  double ueHeightM = 1.5;

  // user plane
  std::int64_t rlcBufferBytes = 10 * 1024 * 1024;
  double x2DelayS = 1e-3;
  double s1DelayS = 1e-3;
  double mmeDelayS = 10e-3;
  double udpIntervalS = 20e-6;
  std::int64_t udpPayloadBytes = 1024;
  int bearers = 1;

  // control
  Architecture architecture = Architecture::DualConnectivity;
  TttMode tttMode = TttMode::Fixed;
  double tttFixedS = 0.150;
  double tttMaxS = 0.150;
  double tttMinS = 0.025;
  double tttDeltaMinDb = 3.0;
  double tttDeltaMaxDb = 8.0;
  bool tttReevaluate = true;  // recompute the dynamic TTT from the current delta each CRT
  double retargetMarginDb = 3.0;
  double randomAccessS = 5e-3;
  double initialAccessS = 30e-3;
  double lteAirLatencyS = 1e-3;

  // timing
  double slotS = 125e-6;
  double simDurationS = 0.0;  // <= 0: derived from trajectory length / speed
  double throughputSampleS = 5e-3;

  /// CRT intergeneration delay for the configured L.
  double crtPeriodS() const;

  /// Throws ConfigError naming the offending field and its legal range.
  void validate() const;
};

/// Applies one `key=value` setting. Unknown keys and bad values throw ConfigError.
void applyConfigValue(SimConfig& config, std::string_view key, std::string_view value);

/// All accepted configuration keys, in documentation order.
std::vector<std::string> configKeys();

}  // namespace mcsim

#endif  // MCSIM_ENGINE_HPP
