#include "mcsim/measurement.hpp"

#include <algorithm>
#include <limits>
#include <ostream>

namespace mcsim {

double crtDelay(int nEnb, int nUe, double tPerS, int l) {
  if (l <= 0) throw DomainError("receiver parallelism L must be >= 1");
  if (nEnb <= 0 || nUe <= 0 || !(tPerS > 0.0))
    throw DomainError("direction counts and SRS period must be > 0");
  if (l > nEnb) throw DomainError("receiver parallelism L must not exceed N_eNB");
  return static_cast<double>(nEnb) * static_cast<double>(nUe) * tPerS / static_cast<double>(l);
}

double estimationSigmaDb(double trueDb, double sigmaLoDb, double sigmaHiDb) {
  const double f = std::clamp(trueDb / 20.0, 0.0, 1.0);
  return sigmaLoDb + f * (sigmaHiDb - sigmaLoDb);
}

double estimateNoise(double trueDb, RandomStream& stream, double sigmaLoDb, double sigmaHiDb) {
  const double sigma = estimationSigmaDb(trueDb, sigmaLoDb, sigmaHiDb);
  // always draw so the stream position does not depend on the channel
  const double z = stream.normal();
  return trueDb + sigma * z;
}

FilterState::FilterState(double eta) : eta_(eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw DomainError("filter eta must lie in (0, 1]");
}

SweepSettings SweepSettings::fromConfig(const SimConfig& c) {
  return SweepSettings{c.estimationNoise, c.estimationSigmaLowDb, c.estimationSigmaHighDb,
                       c.outageThresholdDb};
}

SweepOutcome sweepLink(const LinkSample& sample, const LinkParams& params, FilterState& filter,
                       RandomStream& estimation, const SweepSettings& settings,
                       SweepMatrix* dump) {
  const int nUe = params.ueBook.directions;
  const int nEnb = params.enbBook.directions;
  if (dump) {
    dump->nUe = nUe;
    dump->nEnb = nEnb;
    dump->trueDb.assign(static_cast<std::size_t>(nUe * nEnb), 0.0);
    dump->estimateDb.assign(static_cast<std::size_t>(nUe * nEnb), 0.0);
  }
  // the pair only enters through the summed cluster gain, so the remaining
  // link budget is evaluated once
  const double baseDb = pairSinrDb(sample, BeamPair{0, 0}, params) -
                        clusterBeamGainDb(sample, BeamPair{0, 0}, params.ueBook, params.enbBook);
  double combo[2][2];
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      combo[a][b] = dbToLinear((a ? params.ueBook.maxGainDb : params.ueBook.sidelobeGainDb) +
                               (b ? params.enbBook.maxGainDb : params.enbBook.sidelobeGainDb));
  SweepOutcome out;
  double best = -std::numeric_limits<double>::infinity();
  for (int u = 0; u < nUe; ++u) {
    for (int e = 0; e < nEnb; ++e) {
      double lin = 0.0;
      for (std::size_t c = 0; c < sample.clusters.size(); ++c) {
        lin += sample.clusters[c].powerFraction *
               combo[sample.clusterPairs[c].ue == u][sample.clusterPairs[c].enb == e];
      }
      const double g = baseDb + linearToDb(lin);
      double est = g;
      if (settings.noise) est = estimateNoise(g, estimation, settings.sigmaLoDb, settings.sigmaHiDb);
      if (dump) {
        dump->trueDb[static_cast<std::size_t>(u * nEnb + e)] = g;
        dump->estimateDb[static_cast<std::size_t>(u * nEnb + e)] = est;
      }
      if (est > best) {
        best = est;
        out.pair = BeamPair{u, e};
        out.trueDb = g;
      }
    }
  }
  out.rawDb = best;
  const double candidate = filter.peek(best);
  if (candidate < settings.outageDb) {
    out.belowThreshold = true;
    out.filteredDb = filter.initialized() ? filter.value() : candidate;
    return out;
  }
  out.filteredDb = filter.step(best);
  return out;
}

const CrtRow* CompleteReportTable::row(int ueId) const {
  for (const auto& r : rows)
    if (r.ueId == ueId) return &r;
  return nullptr;
}

CompleteReportTable assembleCrt(const std::vector<ReportTable>& rts, double t, double periodS) {
  CompleteReportTable crt;
  crt.generationTimeS = t;
  crt.periodS = periodS;
  std::vector<int> ues;
  for (const auto& rt : rts)
    for (const auto& r : rt.rows)
      if (std::find(ues.begin(), ues.end(), r.ueId) == ues.end()) ues.push_back(r.ueId);
  std::sort(ues.begin(), ues.end());
  for (int ue : ues) {
    CrtRow row;
    row.ueId = ue;
    for (const auto& rt : rts) {
      CrtEntry entry;
      entry.enbId = rt.enbId;
      const bool fresh = rt.sweepTimeS >= t - periodS - 1e-12;
      for (const auto& r : rt.rows) {
        if (r.ueId != ue) continue;
        entry.sinrDb = r.bestSinrDb;
        entry.pair = r.bestPair;
        entry.outage = r.stale || !fresh;
      }
      row.entries.push_back(entry);
    }
    crt.rows.push_back(std::move(row));
  }
  return crt;
}

void writeSinrTrace(std::ostream& out, const std::vector<SinrTraceRow>& rows) {
  out << "time_s,enb_id,sinr_true_db,sinr_raw_db,sinr_filtered_db\n";
  out.precision(10);
  for (const auto& r : rows) {
    out << r.timeS << ',' << r.enbId << ',' << r.trueDb << ',' << r.rawDb << ',' << r.filteredDb
        << '\n';
  }
}

double calibrateEta(const std::vector<double>& trueDb, const std::vector<double>& rawDb) {
  const std::size_t n = std::min(trueDb.size(), rawDb.size());
  double bestEta = 0.25;
  double bestErr = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 19; ++k) {
    const double eta = 0.05 * k;
    FilterState f(eta);
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = f.step(rawDb[i]) - trueDb[i];
      err += d * d;
    }
    if (n > 0 && err / static_cast<double>(n) < bestErr) {
      bestErr = err / static_cast<double>(n);
      bestEta = eta;
    }
  }
  return bestEta;
}

}  // namespace mcsim
