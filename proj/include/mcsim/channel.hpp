// Semi-statistical mmWave channel: pathloss, beam codebook gains, large- and
// small-scale fading, blockage overlay, and the SINR-to-rate maps.

#ifndef MCSIM_CHANNEL_HPP
#define MCSIM_CHANNEL_HPP

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "mcsim/engine.hpp"
#include "mcsim/scenario.hpp"

namespace mcsim {

constexpr double kBoltzmannDbmHz = -174.0;
constexpr double kSpeedOfLight = 299792458.0;

inline double dbToLinear(double db) { return std::pow(10.0, db / 10.0); }
inline double linearToDb(double lin) { return 10.0 * std::log10(lin); }

/// Thermal noise plus receiver noise figure over `bandwidthHz`, in dBm.
double noisePowerDbm(double bandwidthHz, double noiseFigureDb);

struct PathlossParams {
  double alphaLos = 61.4;
  double betaLos = 2.0;
  double alphaNlos = 72.0;
  double betaNlos = 2.92;

  static PathlossParams fromConfig(const SimConfig& c);
  void validate() const;
};

double pathlossDb(double distanceM, LinkState state, const PathlossParams& params);

struct BeamPair {
  int ue = 0;
  int enb = 0;
  bool operator==(const BeamPair&) const = default;
};

struct BeamCodebook {
  int directions = 1;
  double maxGainDb = 0.0;
  double sidelobeGainDb = -10.0;

  /// Uniform planar array of rows x cols elements: G_max = 10 log10(rows*cols).
  static BeamCodebook forArray(int rows, int cols, int directions, double sidelobeGainDb);

  /// Direction index whose boresight is nearest to `angleRad`.
  int quantize(double angleRad) const;
  double gainDb(int direction, int optimal) const;
};

/// G_max on each side that points at its optimal index, G_sll otherwise.
double beamGainDb(int ueDir, int enbDir, BeamPair optimal, const BeamCodebook& ueBook,
                  const BeamCodebook& enbBook);

/// Attenuation samples (dB, non-positive) on a fixed time grid.
class BlockageTrace {
 public:
  BlockageTrace() = default;
  BlockageTrace(double dtS, std::vector<double> samplesDb, bool cyclic = false);

  double dt() const { return dt_; }
  const std::vector<double>& samples() const { return samples_; }
  bool cyclic() const { return cyclic_; }

  /// Zero-order hold. Past the end: repeat if cyclic, else hold the last value.
  double at(double t) const;

 private:
  double dt_ = 125e-6;
  std::vector<double> samples_;
  bool cyclic_ = false;
};

constexpr double kBlockageFloorDb = -45.0;

struct BlockageShape {
  double decayDbPerMs = 0.2;
  double depthMinDb = -40.0;
  double depthMaxDb = -25.0;
  double meanGapS = 0.3;
  double meanDwellS = 1.0;
  double dtS = 125e-6;

  static BlockageShape fromConfig(const SimConfig& c);
};

/// Trapezoidal blockage events separated by exponential gaps.
BlockageTrace synthBlockageTrace(RandomStream& stream, double durationS, const BlockageShape& shape);

/// Reads `blockage-trace v1, dt=<seconds>` followed by one dB value per line,
/// resampled to `gridS` by zero-order hold. Throws ParseError.
BlockageTrace parseBlockageTrace(std::istream& in, double gridS = 125e-6);
BlockageTrace importBlockageTrace(const std::string& path, double gridS = 125e-6);
void writeBlockageTrace(std::ostream& out, const BlockageTrace& trace);

/// Sum-of-sinusoids Rician envelope; a pure function of time once drawn.
class SmallScaleFading {
 public:
  SmallScaleFading() = default;
  SmallScaleFading(RandomStream& stream, double dopplerHz, int sinusoids, double clipDb);

  /// Power gain in dB for Rician factor kLinear, clipped to +-clipDb.
  double gainDb(double t, double kLinear) const;

 private:
  double dopplerHz_ = 0.0;
  double clipDb_ = 15.0;
  double losFreq_ = 0.0;
  double losPhase_ = 0.0;
  std::vector<double> freq_;
  std::vector<double> phase_;
};

struct Cluster {
  double powerFraction = 1.0;
  double enbOffsetRad = 0.0;
  double ueOffsetRad = 0.0;
};

/// Large-scale draws for one 100 ms epoch. Fractions depend on LOS/NLOS so the
/// state-independent raw draws are kept and mapped on demand.
struct LargeScaleRecord {
  double shadowZ = 0.0;
  std::vector<double> clusterWeights;
};

struct LinkParams {
  double txPowerDbm = 30.0;
  double noiseDbm = -79.0;
  double shadowingLosDb = 4.0;
  double shadowingNlosDb = 7.0;
  double kLosLinear = 10.0;
  double kNlosLinear = 1.0;
  bool nlosPathlossInStatistical = true;
  PathlossParams pathloss;
  BeamCodebook enbBook;
  BeamCodebook ueBook;

  static LinkParams fromConfig(const SimConfig& c);
};

/// Channel of one (UE, mmWave eNB) link evaluated at a single instant.
struct LinkSample {
  LinkState state = LinkState::Los;
  double distanceM = 0.0;
  double pathlossDb = 0.0;
  double shadowDb = 0.0;
  double fastDb = 0.0;
  double blockageDb = 0.0;  // delta, applied only when NLOS
  std::vector<Cluster> clusters;
  std::vector<BeamPair> clusterPairs;  // optimal (ue, enb) indices per cluster
  double interferenceMw = 0.0;         // from every other mmWave eNB
};

/// Gain in dB seen by pair (u, e) summed over clusters.
double clusterBeamGainDb(const LinkSample& s, BeamPair pair, const BeamCodebook& ueBook,
                         const BeamCodebook& enbBook);

/// Gamma for one beam pair: Eq. (4) link budget, plus delta when NLOS.
double pairSinrDb(const LinkSample& s, BeamPair pair, const LinkParams& p);

/// Gamma without the blockage overlay.
double pairStatSinrDb(const LinkSample& s, BeamPair pair, const LinkParams& p);

/// Pair of the strongest cluster.
BeamPair dominantPair(const LinkSample& s);

/// Per-run channel for every mmWave link of a scenario.
class ChannelModel {
 public:
  ChannelModel(const SimConfig& config, const Scenario& scenario, const RngStreams& rng,
               double durationS);

  int links() const { return static_cast<int>(sites_.size()); }
  const Site& site(int link) const { return sites_[static_cast<std::size_t>(link)]; }
  const LinkParams& params() const { return params_; }

  Point3 uePosition(double t) const;

  /// Samples every link at t. `withFading=false` freezes the small-scale term at 0 dB.
  std::vector<LinkSample> sampleAll(double t, bool withFading = true) const;
  LinkSample sample(int link, double t, bool withFading = true) const;

  /// True SINR of `link` for a given beam pair at t.
  double trueSinrDb(int link, BeamPair pair, double t) const;

  const BlockageTrace& blockage(int link) const {
    return blockage_[static_cast<std::size_t>(link)];
  }
  void setBlockage(int link, BlockageTrace trace) {
    blockage_[static_cast<std::size_t>(link)] = std::move(trace);
  }

  /// LTE macro rate at t (never in outage in-scenario).
  double lteRateBps(double t) const;

 private:
  LinkSample sampleGeometry(int link, const Point3& ue, double t, bool withFading) const;
  double largeScalePowerMw(int link, const Point3& ue, double t) const;

  SimConfig config_;
  Scenario scenario_;
  LinkParams params_;
  std::vector<Site> sites_;
  std::vector<std::vector<LargeScaleRecord>> epochs_;
  std::vector<std::vector<double>> enbOffsets_;
  std::vector<std::vector<double>> ueOffsets_;
  std::vector<SmallScaleFading> fading_;
  std::vector<BlockageTrace> blockage_;
};

/// (1 - phi_ov) * min(W log2(1 + gamma), W * SE_max), zero below Gamma_out.
double mmwaveRateBps(double sinrDb, double bandwidthHz, double seMax, double overhead,
                     double outageDb);
double mmwaveRateBps(double sinrDb, const SimConfig& c);

/// Shannon rate over the LTE carrier capped at SE_max, before/after overhead.
double lteRateFromSinrBps(double sinrDb, double bandwidthHz, double seMax, double overhead);
double ltePathlossDb(double distanceM);

}  // namespace mcsim

#endif  // MCSIM_CHANNEL_HPP
