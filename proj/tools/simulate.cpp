// simulate: runs a Monte Carlo campaign and writes CSV results.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mcsim/campaign.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Dual-connectivity mmWave handover simulator"};
  std::string configPath;
  int jobs = 1;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> traceLink;
  std::optional<std::string> scenario;
  std::optional<int> runs;
  std::vector<std::string> overrides;
  bool series = false;
  bool eventLogs = false;
  bool calibrate = false;
  bool quiet = false;

  app.add_option("--config", configPath, "key=value configuration file");
  app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "base seed; run i uses seed + i");
  app.add_option("--out", out, "output directory");
  app.add_option("--trace-link", traceLink, "write sinr_trace.csv for this mmWave eNB id");
  app.add_option("--scenario", scenario, "default or corner")
      ->check(CLI::IsMember({"default", "corner"}));
  app.add_option("--runs", runs, "Monte Carlo repetitions per cell")->check(CLI::PositiveNumber);
  app.add_option("--set", overrides, "override one key=value (repeatable)");
  app.add_flag("--series", series, "also write throughput_series.csv");
  app.add_flag("--event-logs", eventLogs, "also write events.csv");
  app.add_flag("--calibrate-eta", calibrate,
               "pick eta by grid search on a pilot trace and use it for the campaign");
  app.add_flag("--quiet", quiet, "no progress output");
  CLI11_PARSE(app, argc, argv);

  try {
    mcsim::CampaignSpec spec;
    if (!configPath.empty()) spec = mcsim::loadCampaignConfig(configPath);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos)
        throw mcsim::ConfigError("--set expects key=value, got '" + kv + "'");
      mcsim::applyCampaignValue(spec, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (scenario) mcsim::applyCampaignValue(spec, "scenario", *scenario);
    if (seed) spec.baseSeed = *seed;
    if (out) spec.outDir = *out;
    if (runs) spec.runs = *runs;
    if (series) spec.writeSeries = true;
    if (eventLogs) spec.writeEventLogs = true;
    spec.validate();
    mcsim::prepareOutputDir(spec.outDir);

    if (calibrate) {
      const auto rows = mcsim::emitExampleTrace(spec, traceLink.value_or(2));
      std::vector<double> truth;
      std::vector<double> raw;
      for (const auto& r : rows) {
        truth.push_back(r.trueDb);
        raw.push_back(r.rawDb);
      }
      spec.base.filterEta = mcsim::calibrateEta(truth, raw);
      if (!quiet) std::fprintf(stderr, "calibrated eta = %.2f\n", spec.base.filterEta);
    }

    if (traceLink) {
      const auto rows = mcsim::emitExampleTrace(spec, *traceLink);
      std::ofstream f(spec.outDir + "/sinr_trace.csv", std::ios::binary);
      if (!f) throw mcsim::ConfigError("cannot write sinr_trace.csv in '" + spec.outDir + "'");
      mcsim::writeSinrTrace(f, rows);
    }

    mcsim::ProgressFn progress;
    if (!quiet) {
      progress = [](std::size_t done, std::size_t total) {
        if (done == total || done % 10 == 0) std::fprintf(stderr, "\r%zu/%zu runs", done, total);
        if (done == total) std::fprintf(stderr, "\n");
      };
    }
    const auto result = mcsim::runCampaign(spec, jobs, progress);
    mcsim::writeCampaignOutputs(spec, result);
    if (!quiet) {
      std::fprintf(stderr, "wrote %s/runs.csv (%zu runs) and %s/campaign.csv (%zu cells)\n",
                   spec.outDir.c_str(), result.runs.size(), spec.outDir.c_str(),
                   result.cells.size());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "simulate: %s\n", e.what());
    return 1;
  }
  return 0;
}
