#include "mcsim/campaign.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace mcsim {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> splitList(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Axis values are parsed through the SimConfig key of the same meaning so the
// accepted spellings match exactly.
template <typename T>
std::vector<T> parseAxis(const std::string& key, const std::string& value, const char* configKey,
                         T SimConfig::*member) {
  std::vector<T> out;
  for (const auto& item : splitList(value)) {
    SimConfig tmp;
    try {
      applyConfigValue(tmp, configKey, item);
    } catch (const ConfigError& e) {
      throw ConfigError("invalid value '" + item + "' in " + key + ": " + e.what());
    }
    out.push_back(tmp.*member);
  }
  if (out.empty()) throw ConfigError("invalid value for " + key + ": expected a non-empty list");
  return out;
}

bool parseBool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("invalid value '" + value + "' for " + key + ": expected true or false");
}

}  // namespace

void CampaignSpec::restrictToCorner() {
  scenario = ScenarioKind::Corner;
  architectures = {Architecture::DualConnectivity};
  ttts = {TttMode::Fixed, TttMode::Dynamic};
  udpIntervalsS = {20e-6};
}

void CampaignSpec::validate() const {
  base.validate();
  if (runs < 1) throw ConfigError("invalid runs: must be >= 1");
  if (cellCount() == 0) throw ConfigError("invalid campaign axes: every axis needs a value");
  for (int l : ls) {
    SimConfig c = base;
    c.rxParallelism = l;
    c.validate();
  }
  for (double u : udpIntervalsS) {
    SimConfig c = base;
    c.udpIntervalS = u;
    c.validate();
  }
}

std::vector<std::string> campaignKeys() {
  return {"runs",   "seed",       "scenario",         "out",      "blockage_trace",
          "series", "event_logs", "axis_architecture", "axis_ttt", "axis_l",
          "axis_udp_interval"};
}

void applyCampaignValue(CampaignSpec& spec, const std::string& key, const std::string& value) {
  if (key == "runs") {
    try {
      std::size_t used = 0;
      const int n = std::stoi(value, &used);
      if (used != value.size() || n < 1) throw std::invalid_argument(value);
      spec.runs = n;
    } catch (const std::logic_error&) {
      throw ConfigError("invalid value '" + value + "' for runs: expected an integer >= 1");
    }
  } else if (key == "seed") {
    try {
      std::size_t used = 0;
      spec.baseSeed = std::stoull(value, &used);
      if (used != value.size() || value.front() == '-') throw std::invalid_argument(value);
    } catch (const std::logic_error&) {
      throw ConfigError("invalid value '" + value + "' for seed: expected an unsigned integer");
    }
  } else if (key == "scenario") {
    if (parseScenarioKind(value) == ScenarioKind::Corner) spec.restrictToCorner();
    else spec.scenario = ScenarioKind::Default;
  } else if (key == "out") {
    if (value.empty()) throw ConfigError("invalid value for out: expected a directory path");
    spec.outDir = value;
  } else if (key == "blockage_trace") {
    spec.blockageTracePath = value;
  } else if (key == "series") {
    spec.writeSeries = parseBool(key, value);
  } else if (key == "event_logs") {
    spec.writeEventLogs = parseBool(key, value);
  } else if (key == "axis_architecture") {
    spec.architectures = parseAxis(key, value, "architecture", &SimConfig::architecture);
  } else if (key == "axis_ttt") {
    spec.ttts = parseAxis(key, value, "ttt", &SimConfig::tttMode);
  } else if (key == "axis_l") {
    spec.ls = parseAxis(key, value, "l", &SimConfig::rxParallelism);
  } else if (key == "axis_udp_interval") {
    spec.udpIntervalsS = parseAxis(key, value, "udp_interval", &SimConfig::udpIntervalS);
  } else {
    applyConfigValue(spec.base, key, value);
  }
}

CampaignSpec parseCampaignConfig(std::istream& in) {
  CampaignSpec spec;
  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key=value, got '" + line + "'", lineNo);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError("missing key before '='", lineNo);
    try {
      applyCampaignValue(spec, key, value);
    } catch (const ConfigError& e) {
      throw ParseError(e.what(), lineNo);
    }
  }
  return spec;
}

CampaignSpec loadCampaignConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parseCampaignConfig(in);
}

std::vector<RunSpec> expandCampaign(const CampaignSpec& spec) {
  std::optional<BlockageTrace> trace;
  if (spec.blockageTracePath) trace = importBlockageTrace(*spec.blockageTracePath, spec.base.slotS);
  std::vector<RunSpec> out;
  out.reserve(spec.cellCount() * static_cast<std::size_t>(spec.runs));
  for (double udp : spec.udpIntervalsS)
    for (int l : spec.ls)
      for (Architecture a : spec.architectures)
        for (TttMode m : spec.ttts)
          for (int r = 0; r < spec.runs; ++r) {
            RunSpec rs;
            rs.config = spec.base;
            rs.config.udpIntervalS = udp;
            rs.config.rxParallelism = l;
            rs.config.architecture = a;
            rs.config.tttMode = m;
            rs.scenario = spec.scenario;
            rs.seed = spec.baseSeed + static_cast<std::uint64_t>(r);
            rs.runIndex = r;
            rs.blockage = trace;
            rs.keepSeries = spec.writeSeries;
            rs.eventLog = spec.writeEventLogs;
            out.push_back(std::move(rs));
          }
  return out;
}

CampaignResult runCampaign(const CampaignSpec& spec, int jobs, const ProgressFn& progress) {
  spec.validate();
  const std::vector<RunSpec> specs = expandCampaign(spec);
  std::vector<RunResult> results(specs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex errMutex;
  std::exception_ptr firstError;
  std::mutex progressMutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= specs.size()) return;
      {
        std::lock_guard<std::mutex> lock(errMutex);
        if (firstError) return;
      }
      try {
        results[i] = runSimulation(specs[i]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(errMutex);
        if (!firstError) firstError = std::current_exception();
        return;
      }
      const std::size_t d = done.fetch_add(1) + 1;
      if (progress) {
        std::lock_guard<std::mutex> lock(progressMutex);
        progress(d, specs.size());
      }
    }
  };

  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(specs.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (firstError) std::rethrow_exception(firstError);

  CampaignResult out;
  out.runs.reserve(results.size());
  for (auto& r : results) {
    if (spec.writeSeries)
      out.series.push_back(SeriesRecord{r.kpi, std::move(r.series), spec.base.throughputSampleS});
    if (spec.writeEventLogs) out.eventLogs.push_back(std::move(r.eventLog));
    out.runs.push_back(r.kpi);
  }
  out.cells = aggregateCampaign(out.runs);
  return out;
}

void prepareOutputDir(const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
  const fs::path probe = fs::path(dir) / ".write-probe";
  {
    std::ofstream f(probe);
    if (!f) throw ConfigError("output directory '" + dir + "' is not writable");
  }
  fs::remove(probe, ec);
}

namespace {

std::ofstream openOut(const std::filesystem::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + p.string() + "'");
  return f;
}

}  // namespace

void writeCampaignOutputs(const CampaignSpec& spec, const CampaignResult& result) {
  namespace fs = std::filesystem;
  prepareOutputDir(spec.outDir);
  const fs::path dir(spec.outDir);
  {
    auto f = openOut(dir / "runs.csv");
    writeRunsCsv(f, result.runs);
  }
  {
    auto f = openOut(dir / "campaign.csv");
    writeCampaignCsv(f, result.cells);
  }
  if (spec.writeSeries) {
    auto f = openOut(dir / "throughput_series.csv");
    writeThroughputSeriesCsv(f, result.series);
  }
  if (spec.writeEventLogs) {
    auto f = openOut(dir / "events.csv");
    f << "scenario,architecture,ttt,l,udp_interval_s,run,time_s,kind,source_id,target_id\n";
    for (std::size_t i = 0; i < result.eventLogs.size(); ++i) {
      const KpiSummary& k = result.runs[i];
      std::ostringstream prefix;
      prefix << k.scenario << ',' << toString(k.architecture) << ',' << toString(k.ttt) << ','
             << k.l << ',' << k.udpIntervalS << ',' << k.runIndex << ',';
      for (const auto& line : result.eventLogs[i]) f << prefix.str() << line << '\n';
    }
  }
}

std::vector<SinrTraceRow> emitExampleTrace(const CampaignSpec& spec, int enbId) {
  spec.base.validate();
  RunSpec rs;
  rs.config = spec.base;
  rs.scenario = spec.scenario;
  rs.seed = spec.baseSeed;
  rs.traceEnbId = enbId;
  if (spec.blockageTracePath) rs.blockage = importBlockageTrace(*spec.blockageTracePath, spec.base.slotS);
  return runSimulation(rs).sinrTrace;
}

}  // namespace mcsim
