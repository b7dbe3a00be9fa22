#include "mcsim/channel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace mcsim {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

double noisePowerDbm(double bandwidthHz, double noiseFigureDb) {
  return kBoltzmannDbmHz + 10.0 * std::log10(bandwidthHz) + noiseFigureDb;
}

PathlossParams PathlossParams::fromConfig(const SimConfig& c) {
  return PathlossParams{c.pathlossAlphaLos, c.pathlossBetaLos, c.pathlossAlphaNlos,
                        c.pathlossBetaNlos};
}

void PathlossParams::validate() const {
  if (!(alphaLos > 0.0 && alphaNlos > 0.0)) throw ConfigError("pathloss alpha must be > 0");
  if (!(betaLos > 0.0 && betaNlos >= betaLos))
    throw ConfigError("pathloss beta must satisfy beta_nlos >= beta_los > 0");
}

double pathlossDb(double distanceM, LinkState state, const PathlossParams& p) {
  if (!(distanceM > 0.0)) throw DomainError("pathloss distance must be > 0");
  const double logd = 10.0 * std::log10(distanceM);
  return state == LinkState::Los ? p.alphaLos + p.betaLos * logd : p.alphaNlos + p.betaNlos * logd;
}

BeamCodebook BeamCodebook::forArray(int rows, int cols, int directions, double sidelobeGainDb) {
  if (rows <= 0 || cols <= 0 || directions <= 0)
    throw DomainError("array dimensions and direction count must be > 0");
  BeamCodebook b;
  b.directions = directions;
  b.maxGainDb = 10.0 * std::log10(static_cast<double>(rows * cols));
  b.sidelobeGainDb = sidelobeGainDb;
  return b;
}

int BeamCodebook::quantize(double angleRad) const {
  const double step = kTwoPi / directions;
  long idx = std::lround(angleRad / step) % directions;
  if (idx < 0) idx += directions;
  return static_cast<int>(idx);
}

double BeamCodebook::gainDb(int direction, int optimal) const {
  if (direction < 0 || direction >= directions)
    throw DomainError("beam direction " + std::to_string(direction) + " outside codebook of " +
                      std::to_string(directions));
  return direction == optimal ? maxGainDb : sidelobeGainDb;
}

double beamGainDb(int ueDir, int enbDir, BeamPair optimal, const BeamCodebook& ueBook,
                  const BeamCodebook& enbBook) {
  return ueBook.gainDb(ueDir, optimal.ue) + enbBook.gainDb(enbDir, optimal.enb);
}

BlockageTrace::BlockageTrace(double dtS, std::vector<double> samplesDb, bool cyclic)
    : dt_(dtS), samples_(std::move(samplesDb)), cyclic_(cyclic) {
  if (!(dt_ > 0.0)) throw DomainError("blockage trace dt must be > 0");
}

double BlockageTrace::at(double t) const {
  if (samples_.empty() || t < 0.0) return 0.0;
  auto k = static_cast<std::size_t>(std::floor(t / dt_ + 1e-9));
  if (k >= samples_.size()) k = cyclic_ ? k % samples_.size() : samples_.size() - 1;
  return samples_[k];
}

BlockageShape BlockageShape::fromConfig(const SimConfig& c) {
  BlockageShape s;
  s.decayDbPerMs = c.blockageDecayDbPerMs;
  s.depthMinDb = c.blockageDepthMinDb;
  s.depthMaxDb = c.blockageDepthMaxDb;
  s.meanGapS = c.blockageMeanGapS;
  s.meanDwellS = c.blockageMeanDwellS;
  s.dtS = c.slotS;
  return s;
}

BlockageTrace synthBlockageTrace(RandomStream& stream, double durationS, const BlockageShape& shape) {
  if (!(durationS > 0.0)) throw DomainError("blockage trace duration must be > 0");
  const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(durationS / shape.dtS - 1e-9)));
  std::vector<double> samples(n, 0.0);
  const double slope = shape.decayDbPerMs * 1e3;  // dB/s
  double start = stream.exponential(shape.meanGapS);
  while (start < durationS) {
    const double depth = stream.uniform(shape.depthMinDb, shape.depthMaxDb);
    const double dwell = stream.exponential(shape.meanDwellS);
    const double ramp = -depth / slope;
    const double bottom = start + ramp;
    const double rise = bottom + dwell;
    const double end = rise + ramp;
    auto first = static_cast<std::size_t>(std::ceil(start / shape.dtS));
    for (std::size_t k = first; k < n; ++k) {
      const double t = static_cast<double>(k) * shape.dtS;
      if (t >= end) break;
      double v = depth;
      if (t < bottom) v = -slope * (t - start);
      else if (t >= rise) v = depth + slope * (t - rise);
      samples[k] = std::clamp(v, depth, 0.0);
    }
    start = end + stream.exponential(shape.meanGapS);
  }
  return BlockageTrace(shape.dtS, std::move(samples));
}

BlockageTrace parseBlockageTrace(std::istream& in, double gridS) {
  std::string line;
  int lineNo = 0;
  double dtIn = 0.0;
  bool header = false;
  std::vector<double> raw;
  while (std::getline(in, line)) {
    ++lineNo;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (!header) {
      const std::string prefix = "blockage-trace v1, dt=";
      if (line.rfind(prefix, 0) != 0)
        throw ParseError("expected header 'blockage-trace v1, dt=<seconds>'", lineNo);
      char* endp = nullptr;
      const std::string num = line.substr(prefix.size());
      dtIn = std::strtod(num.c_str(), &endp);
      if (endp == num.c_str() || !(dtIn > 0.0)) throw ParseError("invalid dt in header", lineNo);
      header = true;
      continue;
    }
    char* endp = nullptr;
    const double v = std::strtod(line.c_str(), &endp);
    if (endp == line.c_str() || std::string(endp).find_first_not_of(" \t") != std::string::npos)
      throw ParseError("not a number: '" + line + "'", lineNo);
    if (v > 0.0 || v < kBlockageFloorDb)
      throw ParseError("attenuation must lie in [-45, 0] dB", lineNo);
    raw.push_back(v);
  }
  if (!header) throw ParseError("empty blockage trace file", lineNo);
  if (raw.empty()) throw ParseError("blockage trace has no samples", lineNo);
  // integer nanoseconds keep 250 us -> 2 x 125 us exact
  const auto dtInNs = std::llround(dtIn * 1e9);
  const auto gridNs = std::llround(gridS * 1e9);
  const auto spanNs = dtInNs * static_cast<long long>(raw.size());
  const auto n = std::max<long long>(1, spanNs / gridNs);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (long long k = 0; k < n; ++k) {
    const auto src = std::min<long long>((k * gridNs) / dtInNs, static_cast<long long>(raw.size()) - 1);
    out[static_cast<std::size_t>(k)] = raw[static_cast<std::size_t>(src)];
  }
  return BlockageTrace(gridS, std::move(out), true);
}

BlockageTrace importBlockageTrace(const std::string& path, double gridS) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open blockage trace '" + path + "'", 0);
  return parseBlockageTrace(in, gridS);
}

void writeBlockageTrace(std::ostream& out, const BlockageTrace& trace) {
  out.precision(17);
  out << "blockage-trace v1, dt=" << trace.dt() << '\n';
  for (double v : trace.samples()) out << v << '\n';
}

SmallScaleFading::SmallScaleFading(RandomStream& stream, double dopplerHz, int sinusoids,
                                   double clipDb)
    : dopplerHz_(dopplerHz), clipDb_(clipDb) {
  losFreq_ = dopplerHz * std::cos(stream.uniform(0.0, kTwoPi));
  losPhase_ = stream.uniform(0.0, kTwoPi);
  const double theta = stream.uniform(0.0, kTwoPi);
  for (int m = 0; m < sinusoids; ++m) {
    const double alpha = (kTwoPi * m + theta) / sinusoids;
    freq_.push_back(dopplerHz * std::cos(alpha));
    phase_.push_back(stream.uniform(0.0, kTwoPi));
  }
}

double SmallScaleFading::gainDb(double t, double kLinear) const {
  if (freq_.empty()) return 0.0;
  const double a = std::sqrt(kLinear / (kLinear + 1.0));
  const double b = std::sqrt(1.0 / ((kLinear + 1.0) * static_cast<double>(freq_.size())));
  double re = a * std::cos(kTwoPi * losFreq_ * t + losPhase_);
  double im = a * std::sin(kTwoPi * losFreq_ * t + losPhase_);
  for (std::size_t m = 0; m < freq_.size(); ++m) {
    const double arg = kTwoPi * freq_[m] * t + phase_[m];
    re += b * std::cos(arg);
    im += b * std::sin(arg);
  }
  const double p = re * re + im * im;
  const double db = p > 0.0 ? 10.0 * std::log10(p) : -clipDb_;
  return std::clamp(db, -clipDb_, clipDb_);
}

LinkParams LinkParams::fromConfig(const SimConfig& c) {
  LinkParams p;
  p.txPowerDbm = c.mmwaveTxPowerDbm;
  p.noiseDbm = noisePowerDbm(c.mmwaveBandwidthHz, c.noiseFigureDb);
  p.shadowingLosDb = c.shadowingLosDb;
  p.shadowingNlosDb = c.shadowingNlosDb;
  p.kLosLinear = dbToLinear(c.ricianKLosDb);
  p.kNlosLinear = dbToLinear(c.ricianKNlosDb);
  p.nlosPathlossInStatistical = c.nlosPathlossInStatistical;
  p.pathloss = PathlossParams::fromConfig(c);
  p.enbBook = BeamCodebook::forArray(c.enbArrayRows, c.enbArrayCols, c.enbDirections,
                                     c.sidelobeGainDb);
  p.ueBook = BeamCodebook::forArray(c.ueArrayRows, c.ueArrayCols, c.ueDirections, c.sidelobeGainDb);
  return p;
}

double clusterBeamGainDb(const LinkSample& s, BeamPair pair, const BeamCodebook& ueBook,
                         const BeamCodebook& enbBook) {
  double lin = 0.0;
  for (std::size_t c = 0; c < s.clusters.size(); ++c) {
    lin += s.clusters[c].powerFraction *
           dbToLinear(beamGainDb(pair.ue, pair.enb, s.clusterPairs[c], ueBook, enbBook));
  }
  return linearToDb(lin);
}

double pairStatSinrDb(const LinkSample& s, BeamPair pair, const LinkParams& p) {
  const double signalDbm = p.txPowerDbm + clusterBeamGainDb(s, pair, p.ueBook, p.enbBook) -
                           s.pathlossDb - s.shadowDb + s.fastDb;
  const double denom = s.interferenceMw + dbToLinear(p.noiseDbm);
  return signalDbm - linearToDb(denom);
}

double pairSinrDb(const LinkSample& s, BeamPair pair, const LinkParams& p) {
  const double stat = pairStatSinrDb(s, pair, p);
  return s.state == LinkState::Nlos ? stat + s.blockageDb : stat;
}

BeamPair dominantPair(const LinkSample& s) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < s.clusters.size(); ++c)
    if (s.clusters[c].powerFraction > s.clusters[best].powerFraction) best = c;
  return s.clusterPairs.empty() ? BeamPair{} : s.clusterPairs[best];
}

ChannelModel::ChannelModel(const SimConfig& config, const Scenario& scenario,
                           const RngStreams& rng, double durationS)
    : config_(config),
      scenario_(scenario),
      params_(LinkParams::fromConfig(config)),
      sites_(scenario.geometry.sites.mmwave) {
  RandomStream fadingRoot = rng.substream(RngStreams::kFading);
  RandomStream blockRoot = rng.substream(RngStreams::kBlockage);
  const double doppler = config.ueSpeedMps * config.mmwaveCarrierHz / kSpeedOfLight;
  const auto nEpochs =
      static_cast<std::size_t>(std::floor(durationS / config.largeScalePeriodS)) + 2;
  const int nClusters = std::max(1, config.clusters);
  for (std::size_t j = 0; j < sites_.size(); ++j) {
    RandomStream large = fadingRoot.derive(2 * j);
    RandomStream small = fadingRoot.derive(2 * j + 1);
    // scatterer directions are a property of the link, fixed for the run
    std::vector<double> enbOff(static_cast<std::size_t>(nClusters) + 1);
    std::vector<double> ueOff(static_cast<std::size_t>(nClusters) + 1);
    for (int c = 0; c <= nClusters; ++c) {
      enbOff[static_cast<std::size_t>(c)] = large.uniform(-std::numbers::pi / 2, std::numbers::pi / 2);
      ueOff[static_cast<std::size_t>(c)] = large.uniform(-std::numbers::pi / 2, std::numbers::pi / 2);
    }
    enbOffsets_.push_back(std::move(enbOff));
    ueOffsets_.push_back(std::move(ueOff));
    std::vector<LargeScaleRecord> recs(nEpochs);
    for (auto& r : recs) {
      r.shadowZ = large.normal();
      for (int c = 0; c < nClusters; ++c) r.clusterWeights.push_back(large.exponential(1.0));
    }
    epochs_.push_back(std::move(recs));
    fading_.emplace_back(small, doppler, config.fadingSinusoids, config.fastFadingClipDb);
    RandomStream block = blockRoot.derive(j);
    blockage_.push_back(synthBlockageTrace(block, durationS, BlockageShape::fromConfig(config)));
  }
}

Point3 ChannelModel::uePosition(double t) const {
  const Point2 p = scenario_.trajectory.position(t);
  return Point3{p.x, p.y, config_.ueHeightM};
}

double ChannelModel::largeScalePowerMw(int link, const Point3& ue, double t) const {
  const auto j = static_cast<std::size_t>(link);
  const Point3& s = sites_[j].position;
  const LinkState state = linkState(ue, s, scenario_.geometry.buildings);
  const double d = std::max(distance(ue, s), 1.0);
  const LinkState plState =
      (state == LinkState::Nlos && params_.nlosPathlossInStatistical) ? LinkState::Nlos
                                                                      : LinkState::Los;
  const auto e = std::min(static_cast<std::size_t>(t / config_.largeScalePeriodS),
                          epochs_[j].size() - 1);
  const double sigma = state == LinkState::Los ? params_.shadowingLosDb : params_.shadowingNlosDb;
  double db = params_.txPowerDbm + params_.ueBook.sidelobeGainDb + params_.enbBook.sidelobeGainDb -
              pathlossDb(d, plState, params_.pathloss) - sigma * epochs_[j][e].shadowZ;
  if (state == LinkState::Nlos) db += blockage_[j].at(t);
  return dbToLinear(db);
}

LinkSample ChannelModel::sampleGeometry(int link, const Point3& ue, double t,
                                        bool withFading) const {
  const auto j = static_cast<std::size_t>(link);
  const Point3& s = sites_[j].position;
  LinkSample out;
  out.state = linkState(ue, s, scenario_.geometry.buildings);
  out.distanceM = std::max(distance(ue, s), 1.0);
  const LinkState plState =
      (out.state == LinkState::Nlos && params_.nlosPathlossInStatistical) ? LinkState::Nlos
                                                                          : LinkState::Los;
  out.pathlossDb = pathlossDb(out.distanceM, plState, params_.pathloss);
  const auto e = std::min(static_cast<std::size_t>(t / config_.largeScalePeriodS),
                          epochs_[j].size() - 1);
  const LargeScaleRecord& rec = epochs_[j][e];
  const bool los = out.state == LinkState::Los;
  out.shadowDb = (los ? params_.shadowingLosDb : params_.shadowingNlosDb) * rec.shadowZ;
  const double k = los ? params_.kLosLinear : params_.kNlosLinear;
  out.fastDb = withFading ? fading_[j].gainDb(t, k) : 0.0;
  out.blockageDb = blockage_[j].at(t);

  // cluster 0 carries the direct path: geometric angle when LOS, a fixed
  // scatterer offset when NLOS; its weight is boosted by the Rician factor
  const double aEnb = std::atan2(ue.y - s.y, ue.x - s.x);
  const double aUe = aEnb + std::numbers::pi;
  double total = 0.0;
  for (std::size_t c = 0; c < rec.clusterWeights.size(); ++c) {
    Cluster cl;
    cl.powerFraction = rec.clusterWeights[c] * (c == 0 ? k : 1.0);
    const std::size_t off = (c == 0) ? (los ? SIZE_MAX : enbOffsets_[j].size() - 1) : c;
    if (off != SIZE_MAX) {
      cl.enbOffsetRad = enbOffsets_[j][off];
      cl.ueOffsetRad = ueOffsets_[j][off];
    }
    total += cl.powerFraction;
    out.clusters.push_back(cl);
    out.clusterPairs.push_back(BeamPair{params_.ueBook.quantize(aUe + cl.ueOffsetRad),
                                        params_.enbBook.quantize(aEnb + cl.enbOffsetRad)});
  }
  for (auto& cl : out.clusters) cl.powerFraction /= total;
  return out;
}

LinkSample ChannelModel::sample(int link, double t, bool withFading) const {
  const Point3 ue = uePosition(t);
  LinkSample s = sampleGeometry(link, ue, t, withFading);
  for (int k = 0; k < links(); ++k)
    if (k != link) s.interferenceMw += largeScalePowerMw(k, ue, t);
  return s;
}

std::vector<LinkSample> ChannelModel::sampleAll(double t, bool withFading) const {
  const Point3 ue = uePosition(t);
  std::vector<LinkSample> out;
  std::vector<double> power;
  double total = 0.0;
  for (int j = 0; j < links(); ++j) {
    out.push_back(sampleGeometry(j, ue, t, withFading));
    power.push_back(largeScalePowerMw(j, ue, t));
    total += power.back();
  }
  for (std::size_t j = 0; j < out.size(); ++j) out[j].interferenceMw = total - power[j];
  return out;
}

double ChannelModel::trueSinrDb(int link, BeamPair pair, double t) const {
  return pairSinrDb(sample(link, t), pair, params_);
}

double ChannelModel::lteRateBps(double t) const {
  const Point3 ue = uePosition(t);
  const Point3& s = scenario_.geometry.sites.lte.position;
  const double sinr = config_.lteDlTxPowerDbm - ltePathlossDb(distance(ue, s)) -
                      noisePowerDbm(config_.lteBandwidthHz, config_.noiseFigureDb);
  return lteRateFromSinrBps(sinr, config_.lteBandwidthHz, config_.spectralEfficiencyMax,
                            config_.lteOverhead);
}

double mmwaveRateBps(double sinrDb, double bandwidthHz, double seMax, double overhead,
                     double outageDb) {
  if (sinrDb < outageDb) return 0.0;
  const double shannon = bandwidthHz * std::log2(1.0 + dbToLinear(sinrDb));
  return (1.0 - overhead) * std::min(shannon, bandwidthHz * seMax);
}

double mmwaveRateBps(double sinrDb, const SimConfig& c) {
  return mmwaveRateBps(sinrDb, c.mmwaveBandwidthHz, c.spectralEfficiencyMax, c.srsOverhead,
                       c.outageThresholdDb);
}

double lteRateFromSinrBps(double sinrDb, double bandwidthHz, double seMax, double overhead) {
  const double shannon = bandwidthHz * std::log2(1.0 + dbToLinear(sinrDb));
  return (1.0 - overhead) * std::min(shannon, bandwidthHz * seMax);
}

double ltePathlossDb(double distanceM) {
  // macro-cell urban model at 2 GHz; distance floored at 35 m
  const double km = std::max(distanceM, 35.0) / 1000.0;
  return 128.1 + 37.6 * std::log10(km);
}

}  // namespace mcsim
