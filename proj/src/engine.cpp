#include "mcsim/engine.hpp"

#include <array>
#include <charconv>
#include <sstream>
#include <variant>

#include "mcsim/measurement.hpp"

namespace mcsim {

const char* toString(EventKind kind) {
  switch (kind) {
    case EventKind::SlotTick: return "slot-tick";
    case EventKind::SrsSweepStep: return "srs-sweep-step";
    case EventKind::CrtReady: return "crt-ready";
    case EventKind::TttExpiry: return "ttt-expiry";
    case EventKind::PacketArrival: return "packet-arrival";
    case EventKind::LinkService: return "link-service";
    case EventKind::X2Delivery: return "x2-delivery";
    case EventKind::MmeDelivery: return "mme-delivery";
    case EventKind::ProcedureStep: return "procedure-step";
  }
  return "unknown";
}

EventHandle Simulator::schedule(SimTime at, EventKind kind, std::function<void()> payload) {
  if (at < clock_) {
    std::ostringstream msg;
    msg << "cannot schedule " << toString(kind) << " at " << at.seconds()
        << " s: clock is already at " << clock_.seconds() << " s";
    throw ConfigError(msg.str());
  }
  const std::uint64_t seq = nextSequence_++;
  queue_.push(SimEvent{at, seq, kind, std::move(payload)});
  live_.insert(seq);
  return EventHandle{seq};
}

void Simulator::cancel(EventHandle handle) {
  if (!handle.valid()) return;
  if (live_.erase(handle.sequence) > 0) cancelled_.insert(handle.sequence);
}

std::uint64_t Simulator::runUntil(SimTime end) {
  std::uint64_t fired = 0;
  while (!queue_.empty() && queue_.top().fireTime <= end) {
    // priority_queue::top is const; the payload is moved out before pop.
    SimEvent ev = std::move(const_cast<SimEvent&>(queue_.top()));
    queue_.pop();
    if (cancelled_.erase(ev.sequence) > 0) continue;
    live_.erase(ev.sequence);
    clock_ = ev.fireTime;
    if (trace_) trace_(ev.fireTime, ev.kind, ev.sequence);
    ev.payload();
    ++fired;
  }
  if (end > clock_) clock_ = end;
  return fired;
}

std::uint64_t mixSeed(std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer over the pair
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed) : seed_(seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  engine_.seed(seq);
}

RandomStream RandomStream::derive(std::uint64_t index) const {
  return RandomStream(mixSeed(seed_, index));
}

RandomStream RngStreams::substream(std::string_view name) const {
  static constexpr std::array<std::string_view, 4> kDeclared = {kBuildings, kFading, kBlockage,
                                                               kEstimation};
  bool known = false;
  for (auto d : kDeclared) known = known || d == name;
  if (!known) throw ConfigError("unknown random substream '" + std::string(name) + "'");
  return RandomStream(mixSeed(masterSeed_, fnv1a(name)));
}

const char* toString(Architecture a) {
  return a == Architecture::DualConnectivity ? "DC" : "HH";
}

const char* toString(TttMode m) { return m == TttMode::Fixed ? "fixed" : "dynamic"; }

double SimConfig::crtPeriodS() const {
  return crtDelay(enbDirections, ueDirections, srsPeriodS, rxParallelism);
}

namespace {

[[noreturn]] void rangeError(const char* field, const char* range) {
  throw ConfigError(std::string("invalid ") + field + ": must be " + range);
}

}  // namespace

void SimConfig::validate() const {
  auto positive = [](double v, const char* f) {
    if (!(v > 0.0)) rangeError(f, "> 0");
  };
  positive(mmwaveBandwidthHz, "mmwave_bandwidth_hz");
  positive(mmwaveCarrierHz, "mmwave_carrier_hz");
  positive(lteBandwidthHz, "lte_bandwidth_hz");
  positive(lteCarrierHz, "lte_carrier_hz");
  positive(spectralEfficiencyMax, "se_max");
  positive(srsDurationS, "t_sig");
  positive(srsPeriodS, "t_per");
  positive(ueSpeedMps, "ue_speed");
  positive(x2DelayS, "x2_delay");
  positive(s1DelayS, "s1_delay");
  positive(mmeDelayS, "mme_delay");
  positive(udpIntervalS, "udp_interval");
  positive(slotS, "slot");
  positive(largeScalePeriodS, "large_scale_period");
  positive(throughputSampleS, "throughput_sample");
  positive(tttMinS, "ttt_min");
  positive(blockageDecayDbPerMs, "blockage_decay_db_per_ms");
  positive(blockageMeanGapS, "blockage_mean_gap");
  positive(blockageMeanDwellS, "blockage_mean_dwell");
  if (randomAccessS < 0.0) rangeError("random_access", ">= 0");
  if (initialAccessS < 0.0) rangeError("initial_access", ">= 0");
  if (lteAirLatencyS < 0.0) rangeError("lte_air_latency", ">= 0");
  if (srsDurationS >= srsPeriodS) rangeError("t_sig", "< t_per");
  if (std::abs(srsOverhead - srsDurationS / srsPeriodS) > 1e-9 * (srsDurationS / srsPeriodS))
    rangeError("overhead", "equal to t_sig / t_per (within 1e-9 relative)");
  if (lteOverhead < 0.0 || lteOverhead >= 1.0) rangeError("lte_overhead", "in [0, 1)");
  if (enbDirections < 1) rangeError("n_enb", ">= 1");
  if (ueDirections < 1) rangeError("n_ue", ">= 1");
  if (enbArrayRows < 1 || enbArrayCols < 1) rangeError("enb_array", "at least 1x1");
  if (ueArrayRows < 1 || ueArrayCols < 1) rangeError("ue_array", "at least 1x1");
  if (rxParallelism < 1 || rxParallelism > enbDirections) rangeError("l", "in [1, n_enb]");
  if (sidelobeGainDb >= 10.0 * std::log10(double(ueArrayRows * ueArrayCols)))
    rangeError("sidelobe_gain", "below the UE array gain");
  if (!(pathlossAlphaLos > 0.0) || !(pathlossAlphaNlos > 0.0))
    rangeError("pathloss_alpha", "> 0");
  if (!(pathlossBetaLos > 0.0) || pathlossBetaNlos < pathlossBetaLos)
    rangeError("pathloss_beta", "with beta_nlos >= beta_los > 0");
  if (shadowingLosDb < 0.0 || shadowingNlosDb < 0.0) rangeError("shadowing", ">= 0");
  if (fastFadingClipDb < 0.0) rangeError("fading_clip", ">= 0");
  if (fadingSinusoids < 1) rangeError("fading_sinusoids", ">= 1");
  if (clusters < 1) rangeError("clusters", ">= 1");
  if (!(blockageDepthMinDb <= blockageDepthMaxDb && blockageDepthMaxDb <= 0.0 &&
        blockageDepthMinDb >= -45.0))
    rangeError("blockage_depth", "-45 <= depth_min <= depth_max <= 0");
  if (estimationSigmaLowDb < 0.0 || estimationSigmaHighDb < 0.0)
    rangeError("estimation_sigma", ">= 0");
  if (!(filterEta > 0.0 && filterEta <= 1.0)) rangeError("eta", "in (0, 1]");
  if (ueHeightM < 0.0) rangeError("ue_height", ">= 0");
  if (rlcBufferBytes < udpPayloadBytes) rangeError("rlc_buffer", ">= udp_payload");
  if (udpPayloadBytes < 1) rangeError("udp_payload", ">= 1");
  if (bearers < 1) rangeError("bearers", ">= 1");
  if (!(tttMinS <= tttMaxS)) rangeError("ttt_min", "<= ttt_max");
  if (!(tttFixedS > 0.0)) rangeError("ttt_fixed", "> 0");
  if (!(tttDeltaMinDb < tttDeltaMaxDb)) rangeError("ttt_delta_min", "< ttt_delta_max");
  if (retargetMarginDb < 0.0) rangeError("retarget_margin", ">= 0");
  if (simDurationS < 0.0) rangeError("sim_duration", ">= 0 (0 derives it from the path)");
  if (crtPeriodS() <= x2DelayS)
    rangeError("l", "such that the CRT period n_enb*n_ue*t_per/l exceeds x2_delay");
}

namespace {

using Field = std::variant<double SimConfig::*, int SimConfig::*, std::int64_t SimConfig::*,
                           bool SimConfig::*, Architecture SimConfig::*, TttMode SimConfig::*>;

struct KeyEntry {
  const char* key;
  Field field;
};

const std::vector<KeyEntry>& keyTable() {
  static const std::vector<KeyEntry> table = {
      {"mmwave_bandwidth_hz", &SimConfig::mmwaveBandwidthHz},
      {"mmwave_carrier_hz", &SimConfig::mmwaveCarrierHz},
      {"mmwave_tx_power_dbm", &SimConfig::mmwaveTxPowerDbm},
      {"noise_figure_db", &SimConfig::noiseFigureDb},
      {"outage_threshold_db", &SimConfig::outageThresholdDb},
      {"enb_array_rows", &SimConfig::enbArrayRows},
      {"enb_array_cols", &SimConfig::enbArrayCols},
      {"ue_array_rows", &SimConfig::ueArrayRows},
      {"ue_array_cols", &SimConfig::ueArrayCols},
      {"n_enb", &SimConfig::enbDirections},
      {"n_ue", &SimConfig::ueDirections},
      {"sidelobe_gain_db", &SimConfig::sidelobeGainDb},
      {"se_max", &SimConfig::spectralEfficiencyMax},
      {"lte_bandwidth_hz", &SimConfig::lteBandwidthHz},
      {"lte_carrier_hz", &SimConfig::lteCarrierHz},
      {"lte_dl_tx_power_dbm", &SimConfig::lteDlTxPowerDbm},
      {"lte_ul_tx_power_dbm", &SimConfig::lteUlTxPowerDbm},
      {"lte_overhead", &SimConfig::lteOverhead},
      {"t_sig", &SimConfig::srsDurationS},
      {"t_per", &SimConfig::srsPeriodS},
      {"overhead", &SimConfig::srsOverhead},
      {"l", &SimConfig::rxParallelism},
      {"pathloss_alpha_los", &SimConfig::pathlossAlphaLos},
      {"pathloss_beta_los", &SimConfig::pathlossBetaLos},
      {"pathloss_alpha_nlos", &SimConfig::pathlossAlphaNlos},
      {"pathloss_beta_nlos", &SimConfig::pathlossBetaNlos},
      {"shadowing_los_db", &SimConfig::shadowingLosDb},
      {"shadowing_nlos_db", &SimConfig::shadowingNlosDb},
      {"large_scale_period", &SimConfig::largeScalePeriodS},
      {"fading_clip_db", &SimConfig::fastFadingClipDb},
      {"rician_k_los_db", &SimConfig::ricianKLosDb},
      {"rician_k_nlos_db", &SimConfig::ricianKNlosDb},
      {"fading_sinusoids", &SimConfig::fadingSinusoids},
      {"clusters", &SimConfig::clusters},
      {"nlos_pathloss_in_statistical", &SimConfig::nlosPathlossInStatistical},
      {"blockage_decay_db_per_ms", &SimConfig::blockageDecayDbPerMs},
      {"blockage_depth_min_db", &SimConfig::blockageDepthMinDb},
      {"blockage_depth_max_db", &SimConfig::blockageDepthMaxDb},
      {"blockage_mean_gap", &SimConfig::blockageMeanGapS},
      {"blockage_mean_dwell", &SimConfig::blockageMeanDwellS},
      {"estimation_noise", &SimConfig::estimationNoise},
      {"ttt_reevaluate", &SimConfig::tttReevaluate},
      {"estimation_sigma_low_db", &SimConfig::estimationSigmaLowDb},
      {"estimation_sigma_high_db", &SimConfig::estimationSigmaHighDb},
      {"eta", &SimConfig::filterEta},
      {"ue_speed", &SimConfig::ueSpeedMps},
      {"ue_height", &SimConfig::ueHeightM},
      {"rlc_buffer_bytes", &SimConfig::rlcBufferBytes},
      {"x2_delay", &SimConfig::x2DelayS},
      {"s1_delay", &SimConfig::s1DelayS},
      {"mme_delay", &SimConfig::mmeDelayS},
      {"udp_interval", &SimConfig::udpIntervalS},
      {"udp_payload_bytes", &SimConfig::udpPayloadBytes},
      {"bearers", &SimConfig::bearers},
      {"architecture", &SimConfig::architecture},
      {"ttt", &SimConfig::tttMode},
      {"ttt_fixed", &SimConfig::tttFixedS},
      {"ttt_max", &SimConfig::tttMaxS},
      {"ttt_min", &SimConfig::tttMinS},
      {"ttt_delta_min_db", &SimConfig::tttDeltaMinDb},
      {"ttt_delta_max_db", &SimConfig::tttDeltaMaxDb},
      {"retarget_margin_db", &SimConfig::retargetMarginDb},
      {"random_access", &SimConfig::randomAccessS},
      {"initial_access", &SimConfig::initialAccessS},
      {"lte_air_latency", &SimConfig::lteAirLatencyS},
      {"slot", &SimConfig::slotS},
      {"sim_duration", &SimConfig::simDurationS},
      {"throughput_sample", &SimConfig::throughputSampleS},
  };
  return table;
}

[[noreturn]] void badValue(std::string_view key, std::string_view value, const char* expected) {
  throw ConfigError("invalid value '" + std::string(value) + "' for " + std::string(key) +
                    ": expected " + expected);
}

template <typename T>
T parseNumber(std::string_view key, std::string_view value) {
  T out{};
  if constexpr (std::is_floating_point_v<T>) {
    // from_chars for double is not available on every libstdc++ we target
    std::string buf(value);
    char* end = nullptr;
    out = std::strtod(buf.c_str(), &end);
    if (buf.empty() || end != buf.c_str() + buf.size() || !std::isfinite(out))
      badValue(key, value, "a finite number");
  } else {
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size())
      badValue(key, value, "an integer");
  }
  return out;
}

}  // namespace

void applyConfigValue(SimConfig& config, std::string_view key, std::string_view value) {
  for (const auto& entry : keyTable()) {
    if (key != entry.key) continue;
    std::visit(
        [&](auto member) {
          using T = std::remove_reference_t<decltype(config.*member)>;
          if constexpr (std::is_same_v<T, bool>) {
            if (value == "true" || value == "1") config.*member = true;
            else if (value == "false" || value == "0") config.*member = false;
            else badValue(key, value, "true or false");
          } else if constexpr (std::is_same_v<T, Architecture>) {
            if (value == "DC" || value == "dc") config.*member = Architecture::DualConnectivity;
            else if (value == "HH" || value == "hh") config.*member = Architecture::HardHandover;
            else badValue(key, value, "DC or HH");
          } else if constexpr (std::is_same_v<T, TttMode>) {
            if (value == "fixed") config.*member = TttMode::Fixed;
            else if (value == "dynamic") config.*member = TttMode::Dynamic;
            else badValue(key, value, "fixed or dynamic");
          } else {
            config.*member = parseNumber<T>(key, value);
          }
        },
        entry.field);
    return;
  }
  throw ConfigError("unknown configuration key '" + std::string(key) + "'");
}

std::vector<std::string> configKeys() {
  std::vector<std::string> keys;
  for (const auto& e : keyTable()) keys.emplace_back(e.key);
  return keys;
}

}  // namespace mcsim
