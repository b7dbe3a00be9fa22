// Uplink SRS sweep, per-eNB report tables, coordinator-side complete report
// table, estimation noise and the first-order SINR filter.

#ifndef MCSIM_MEASUREMENT_HPP
#define MCSIM_MEASUREMENT_HPP

#include <iosfwd>
#include <optional>
#include <vector>

#include "mcsim/channel.hpp"
#include "mcsim/engine.hpp"

namespace mcsim {

/// D = n_enb * n_ue * t_per / l. Throws DomainError unless 1 <= l <= n_enb.
double crtDelay(int nEnb, int nUe, double tPerS, int l);

/// Linear from sigmaLo at gamma <= 0 dB to sigmaHi at gamma >= 20 dB.
double estimationSigmaDb(double trueDb, double sigmaLoDb, double sigmaHiDb);

double estimateNoise(double trueDb, RandomStream& stream, double sigmaLoDb, double sigmaHiDb);

class FilterState {
 public:
  explicit FilterState(double eta = 0.25);

  double eta() const { return eta_; }
  bool initialized() const { return initialized_; }
  double value() const { return value_; }

  /// Value step() would produce, without storing it.
  double peek(double raw) const { return initialized_ ? (1.0 - eta_) * value_ + eta_ * raw : raw; }

  /// First sample initializes the state; later ones apply (1-eta)prev + eta raw.
  double step(double raw) {
    value_ = peek(raw);
    initialized_ = true;
    return value_;
  }

 private:
  double eta_;
  double value_ = 0.0;
  bool initialized_ = false;
};

struct SweepOutcome {
  bool belowThreshold = false;
  BeamPair pair;
  double trueDb = 0.0;      // gamma of the chosen pair
  double rawDb = 0.0;       // noisy estimate of the chosen pair
  double filteredDb = 0.0;  // filter state after this sweep
};

/// Row-major (ue, enb) matrices produced during one sweep.
struct SweepMatrix {
  int nUe = 0;
  int nEnb = 0;
  std::vector<double> trueDb;
  std::vector<double> estimateDb;
  double at(const std::vector<double>& m, int u, int e) const {
    return m[static_cast<std::size_t>(u * nEnb + e)];
  }
};

struct SweepSettings {
  bool noise = true;
  double sigmaLoDb = 3.0;
  double sigmaHiDb = 0.5;
  double outageDb = -5.0;

  static SweepSettings fromConfig(const SimConfig& c);
};

/// Evaluates every (ue, enb) pair on the frozen sample, picks the argmax of the
/// estimates (first in row-major order on ties) and filters its value. When
/// the filtered candidate is below the outage threshold, the filter is left
/// untouched and the outcome is flagged below-threshold.
SweepOutcome sweepLink(const LinkSample& sample, const LinkParams& params, FilterState& filter,
                       RandomStream& estimation, const SweepSettings& settings,
                       SweepMatrix* dump = nullptr);

struct ReportRow {
  int ueId = 0;
  double bestSinrDb = 0.0;
  BeamPair bestPair;
  bool stale = false;
};

struct ReportTable {
  int enbId = 0;
  double sweepTimeS = 0.0;
  std::vector<ReportRow> rows;
};

struct CrtEntry {
  int enbId = 0;
  double sinrDb = 0.0;
  BeamPair pair;
  bool outage = true;
};

struct CrtRow {
  int ueId = 0;
  std::vector<CrtEntry> entries;
};

struct CompleteReportTable {
  double generationTimeS = 0.0;
  double periodS = 0.0;
  std::vector<CrtRow> rows;

  const CrtRow* row(int ueId) const;
};

/// One row per UE seen in any RT, one entry per RT in input order. Missing,
/// stale or out-of-window (older than t - period) reports become outage entries.
CompleteReportTable assembleCrt(const std::vector<ReportTable>& rts, double t, double periodS);

struct SinrTraceRow {
  double timeS = 0.0;
  int enbId = 0;
  double trueDb = 0.0;
  double rawDb = 0.0;
  double filteredDb = 0.0;
};

void writeSinrTrace(std::ostream& out, const std::vector<SinrTraceRow>& rows);

/// Grid search over eta in {0.05, 0.10, ..., 0.95} minimizing the mean squared
/// error between the filtered raw series and the true series.
double calibrateEta(const std::vector<double>& trueDb, const std::vector<double>& rawDb);

}  // namespace mcsim

#endif  // MCSIM_MEASUREMENT_HPP
