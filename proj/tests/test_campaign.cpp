#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>

#include "mcsim/campaign.hpp"

using namespace mcsim;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

int runCli(const std::string& args) {
  const std::string cmd = std::string(SIMULATE_EXE) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mcsim_test_campaign_" + name);
  fs::remove_all(p);
  return p;
}

CampaignSpec tinySpec(const std::string& out) {
  CampaignSpec s;
  s.base.simDurationS = 0.3;
  s.runs = 2;
  s.ls = {16};
  s.udpIntervalsS = {80e-6};
  s.outDir = out;
  return s;
}

}  // namespace

TEST_CASE("an empty config yields the full default grid") {
  std::istringstream in("");
  const CampaignSpec s = parseCampaignConfig(in);
  CHECK(s.cellCount() == 24);
  CHECK(s.runs == 20);
  CHECK(s.base.rxParallelism == 16);
  CHECK(s.base.udpIntervalS == 20e-6);
  CHECK(s.base.x2DelayS == 1e-3);
  CHECK(expandCampaign(s).size() == 480);
}

TEST_CASE("config files accept comments and blank lines") {
  std::istringstream in("# pinned\n\nruns = 3\nseed=42 # trailing\naxis_l = 1, 2\naxis_architecture=DC\n"
                        "ttt_min = 0.03\n");
  const CampaignSpec s = parseCampaignConfig(in);
  CHECK(s.runs == 3);
  CHECK(s.baseSeed == 42);
  CHECK(s.ls == std::vector<int>{1, 2});
  REQUIRE(s.architectures.size() == 1);
  CHECK(s.cellCount() == 1 * 2 * 2 * 2);
}

TEST_CASE("config errors carry the line number and the key") {
  std::istringstream bad("runs = 2\n\nbogus_key = 1\n");
  try {
    parseCampaignConfig(bad);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("bogus_key") != std::string::npos);
  }
  std::istringstream noEq("runs 2\n");
  CHECK_THROWS_AS(parseCampaignConfig(noEq), ParseError);
  std::istringstream range("l = 0\n");
  try {
    CampaignSpec s = parseCampaignConfig(range);
    s.validate();
    FAIL("expected an error for l = 0");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("l") != std::string::npos);
  }
}

TEST_CASE("inconsistent SRS overhead is rejected") {
  std::istringstream in("overhead = 0.1\n");
  CampaignSpec s = parseCampaignConfig(in);
  CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("axis values are validated") {
  CampaignSpec s;
  CHECK_THROWS_AS(applyCampaignValue(s, "axis_ttt", "fixed,sometimes"), ConfigError);
  CHECK_THROWS_AS(applyCampaignValue(s, "axis_l", ""), ConfigError);
  CHECK_THROWS_AS(applyCampaignValue(s, "runs", "0"), ConfigError);
  CHECK_THROWS_AS(applyCampaignValue(s, "seed", "-4"), ConfigError);
  CHECK_THROWS_AS(applyCampaignValue(s, "series", "maybe"), ConfigError);
  applyCampaignValue(s, "axis_l", "16,2,1");
  CHECK(s.ls == std::vector<int>{16, 2, 1});
}

TEST_CASE("expansion: grid completeness, order and seeds") {
  CampaignSpec s;
  s.runs = 4;
  s.baseSeed = 100;
  const auto runs = expandCampaign(s);
  REQUIRE(runs.size() == 96);
  std::map<std::tuple<int, int, int, long long>, int> perCell;
  for (const auto& r : runs) {
    const auto key = std::make_tuple(static_cast<int>(r.config.architecture), static_cast<int>(r.config.tttMode),
                                     r.config.rxParallelism, std::llround(r.config.udpIntervalS * 1e9));
    ++perCell[key];
    CHECK(r.seed == 100 + static_cast<std::uint64_t>(r.runIndex));
  }
  CHECK(perCell.size() == 24);
  for (const auto& [k, n] : perCell) CHECK(n == 4);
  // run index is innermost, T_UDP outermost
  CHECK(runs[0].runIndex == 0);
  CHECK(runs[3].runIndex == 3);
  CHECK(runs[0].config.udpIntervalS == 20e-6);
  CHECK(runs[95].config.udpIntervalS == 80e-6);
  // within a cell every run has its own seed
  std::set<std::uint64_t> seeds;
  for (int i = 0; i < 4; ++i) seeds.insert(runs[static_cast<std::size_t>(i)].seed);
  CHECK(seeds.size() == 4);
}

TEST_CASE("corner campaigns compare fixed and dynamic TTT under DC") {
  CampaignSpec s;
  applyCampaignValue(s, "scenario", "corner");
  CHECK((s.scenario == ScenarioKind::Corner));
  REQUIRE(s.architectures.size() == 1);
  CHECK((s.architectures[0] == Architecture::DualConnectivity));
  CHECK(s.ttts.size() == 2);
  CHECK(s.udpIntervalsS == std::vector<double>{20e-6});
}

TEST_CASE("campaign results do not depend on the worker count") {
  const auto dir1 = scratch("jobs1");
  const auto dir2 = scratch("jobs3");
  CampaignSpec a = tinySpec(dir1.string());
  CampaignSpec b = tinySpec(dir2.string());
  const auto r1 = runCampaign(a, 1);
  const auto r2 = runCampaign(b, 3);
  writeCampaignOutputs(a, r1);
  writeCampaignOutputs(b, r2);
  CHECK(r1.runs.size() == 8);
  CHECK(r1.cells.size() == 4);
  const std::string csv1 = slurp(dir1 / "runs.csv");
  CHECK_FALSE(csv1.empty());
  CHECK(csv1 == slurp(dir2 / "runs.csv"));
  CHECK(slurp(dir1 / "campaign.csv") == slurp(dir2 / "campaign.csv"));
  fs::remove_all(dir1);
  fs::remove_all(dir2);
}

TEST_CASE("an unwritable output directory is a startup error") {
  const auto blocker = scratch("blocker");
  { std::ofstream(blocker) << "x"; }
  CHECK_THROWS_AS(prepareOutputDir((blocker / "sub").string()), ConfigError);
  fs::remove(blocker);
}

TEST_CASE("example trace rows at D = 1.6 ms") {
  CampaignSpec s;
  s.base.simDurationS = 20.0;
  s.base.estimationNoise = false;
  const auto rows = emitExampleTrace(s, 2);
  CHECK(rows.size() == doctest::Approx(12500).epsilon(0.001));
  for (const auto& r : rows) CHECK(r.rawDb == r.trueDb);
  std::ostringstream out;
  writeSinrTrace(out, rows);
  CHECK(out.str().substr(0, out.str().find('\n')).find("time_s") == 0);
}

TEST_CASE("CLI exit codes") {
  const auto dir = scratch("cli");
  CHECK(runCli("--help") == 0);
  CHECK(runCli("--runs 1 --quiet --set sim_duration=0.2 --set axis_l=16 --set axis_udp_interval=80e-6 "
               "--set axis_ttt=fixed --set axis_architecture=DC --out " + dir.string()) == 0);
  CHECK(fs::exists(dir / "runs.csv"));
  CHECK(fs::exists(dir / "campaign.csv"));
  CHECK(runCli("--quiet --set no_such_key=1 --out " + dir.string()) != 0);
  CHECK(runCli("--quiet --config " + (dir / "missing.cfg").string()) != 0);
  CHECK(runCli("--quiet --scenario grid") != 0);
  CHECK(runCli("--quiet --runs 1 --set sim_duration=0.2 --trace-link 99 --out " + dir.string()) != 0);

  const auto blocker = scratch("cli_blocker");
  { std::ofstream(blocker) << "x"; }
  CHECK(runCli("--quiet --runs 1 --out " + (blocker / "sub").string()) != 0);
  fs::remove(blocker);
  fs::remove_all(dir);
}
