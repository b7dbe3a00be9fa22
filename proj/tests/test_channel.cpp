#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "mcsim/channel.hpp"
#include "oracles.hpp"

using namespace mcsim;

namespace {

// One eNB at 100 m in open space, UE at antenna height so the 3-D distance is
// exactly 100 m.
Scenario openField(std::vector<Site> sites) {
  Scenario s;
  s.geometry.bounds = Rect{-200, -200, 400, 200};
  s.geometry.sites.mmwave = std::move(sites);
  s.geometry.sites.lte = Site{1, {100, 0, 10}};
  s.trajectory = Trajectory({{0, 0}, {10, 0}}, 1.0);
  return s;
}

SimConfig quietConfig() {
  SimConfig c;
  c.shadowingLosDb = 0.0;
  c.shadowingNlosDb = 0.0;
  c.clusters = 1;
  c.ueHeightM = 10.0;
  return c;
}

}  // namespace

TEST_CASE("pathloss formula") {
  const PathlossParams p;
  CHECK(pathlossDb(1.0, LinkState::Los, p) == doctest::Approx(61.4));
  CHECK(pathlossDb(1.0, LinkState::Nlos, p) == doctest::Approx(72.0));
  CHECK(pathlossDb(100.0, LinkState::Los, p) == doctest::Approx(101.4).epsilon(1e-12));
  CHECK(pathlossDb(100.0, LinkState::Nlos, p) == doctest::Approx(130.4).epsilon(1e-12));
  CHECK_THROWS_AS(pathlossDb(0.0, LinkState::Los, p), DomainError);
  CHECK_THROWS_AS(pathlossDb(-3.0, LinkState::Los, p), DomainError);
}

TEST_CASE("pathloss parameter validation") {
  PathlossParams p;
  CHECK_NOTHROW(p.validate());
  p.betaNlos = 1.5;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("beam codebook gains") {
  const auto enb = BeamCodebook::forArray(8, 8, 16, -10.0);
  const auto ue = BeamCodebook::forArray(4, 4, 8, -10.0);
  CHECK(enb.maxGainDb == doctest::Approx(18.0618).epsilon(1e-5));
  CHECK(ue.maxGainDb == doctest::Approx(12.0412).epsilon(1e-5));
  const BeamPair opt{3, 5};
  CHECK(beamGainDb(3, 5, opt, ue, enb) == doctest::Approx(30.103).epsilon(1e-4));
  CHECK(beamGainDb(0, 0, opt, ue, enb) == doctest::Approx(-20.0));
  CHECK(beamGainDb(0, 5, opt, ue, enb) == doctest::Approx(8.0618).epsilon(1e-4));
  CHECK_THROWS_AS(beamGainDb(8, 5, opt, ue, enb), DomainError);
  CHECK_THROWS_AS(beamGainDb(0, -1, opt, ue, enb), DomainError);
}

TEST_CASE("codebook quantization wraps around") {
  const auto b = BeamCodebook::forArray(8, 8, 16, -10.0);
  const double step = 2 * std::numbers::pi / 16;
  CHECK(b.quantize(0.0) == 0);
  CHECK(b.quantize(step * 3.2) == 3);
  CHECK(b.quantize(-step) == 15);
  CHECK(b.quantize(2 * std::numbers::pi) == 0);
}

TEST_CASE("noise power at 1 GHz with NF 5 dB") {
  CHECK(noisePowerDbm(1e9, 5.0) == doctest::Approx(-79.0).epsilon(1e-12));
}

TEST_CASE("single aligned LOS link at 100 m") {
  const SimConfig c = quietConfig();
  const Scenario sc = openField({Site{2, {100, 0, 10}}});
  const ChannelModel ch(c, sc, RngStreams(1), 10.0);
  const LinkSample s = ch.sample(0, 0.0, false);
  CHECK((s.state == LinkState::Los));
  CHECK(s.distanceM == doctest::Approx(100.0));
  CHECK(s.interferenceMw == 0.0);
  const double sinr = pairSinrDb(s, dominantPair(s), ch.params());
  CHECK(sinr == doctest::Approx(30.0 - 101.4 + 10 * std::log10(64.0 * 16.0) + 79.0).epsilon(1e-9));
  CHECK(sinr == doctest::Approx(37.7).epsilon(1e-3));
}

TEST_CASE("pairSinrDb matches an independent link budget") {
  SimConfig c;
  RngStreams rng(3);
  RandomStream bs = rng.substream(RngStreams::kBuildings);
  const Scenario sc = defaultScenario(bs, c.ueSpeedMps);
  const ChannelModel ch(c, sc, rng, 20.0);
  RandomStream pick(17);
  for (int i = 0; i < 300; ++i) {
    const double t = pick.uniform(0.0, 20.0);
    const auto all = ch.sampleAll(t);
    for (int j = 0; j < ch.links(); ++j) {
      const BeamPair p{static_cast<int>(pick.next() % 8), static_cast<int>(pick.next() % 16)};
      CHECK(pairSinrDb(all[static_cast<std::size_t>(j)], p, ch.params()) ==
            doctest::Approx(oracle::sinrDb(all[static_cast<std::size_t>(j)], p, ch.params())).epsilon(1e-9));
    }
  }
}

TEST_CASE("blockage applies only in NLOS") {
  SimConfig c;
  c.blockageMeanGapS = 0.2;
  c.blockageMeanDwellS = 0.5;
  int los = 0;
  int nlosBlocked = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    RngStreams rng(seed);
    RandomStream bs = rng.substream(RngStreams::kBuildings);
    const Scenario sc = defaultScenario(bs, c.ueSpeedMps);
    const ChannelModel ch(c, sc, rng, 20.0);
    for (double t = 0.0; t < 20.0; t += 0.0731) {
      for (int j = 0; j < ch.links(); ++j) {
        const LinkSample s = ch.sample(j, t);
        const BeamPair p = dominantPair(s);
        const double diff = pairSinrDb(s, p, ch.params()) - pairStatSinrDb(s, p, ch.params());
        if (s.state == LinkState::Los) {
          CHECK(diff == 0.0);
          ++los;
        } else {
          CHECK(diff == doctest::Approx(ch.blockage(j).at(t)));
          CHECK(diff <= 0.0);
          nlosBlocked += diff < 0.0;
        }
      }
    }
  }
  CHECK(los > 0);
  CHECK(nlosBlocked > 0);
}

TEST_CASE("NLOS with delta -35 dB on a 30 dB statistical SINR gives -5 dB") {
  LinkParams p;
  p.noiseDbm = -79.0;
  LinkSample s;
  s.state = LinkState::Nlos;
  s.clusters = {Cluster{}};
  s.clusterPairs = {BeamPair{0, 0}};
  s.blockageDb = -35.0;
  // pick pathloss so the statistical SINR is exactly 30 dB
  s.pathlossDb = p.txPowerDbm + p.ueBook.maxGainDb + p.enbBook.maxGainDb + 79.0 - 30.0;
  CHECK(pairStatSinrDb(s, BeamPair{0, 0}, p) == doctest::Approx(30.0));
  CHECK(pairSinrDb(s, BeamPair{0, 0}, p) == doctest::Approx(-5.0));
  s.state = LinkState::Los;
  CHECK(pairSinrDb(s, BeamPair{0, 0}, p) == doctest::Approx(30.0));
}

TEST_CASE("property: adding an interferer never raises the SINR") {
  const SimConfig c = quietConfig();
  const Scenario one = openField({Site{2, {100, 0, 10}}});
  for (int k = 0; k < 50; ++k) {
    const double x = -150.0 + 6.0 * k;
    const Scenario two = openField({Site{2, {100, 0, 10}}, Site{3, {x, 80, 10}}});
    const ChannelModel a(c, one, RngStreams(5), 10.0);
    const ChannelModel b(c, two, RngStreams(5), 10.0);
    for (double t : {0.0, 3.3, 7.9}) {
      const auto sa = a.sample(0, t);
      const auto sb = b.sample(0, t);
      const BeamPair p = dominantPair(sa);
      CHECK(sb.interferenceMw > 0.0);
      CHECK(pairSinrDb(sb, p, b.params()) <= pairSinrDb(sa, p, a.params()));
    }
  }
}

TEST_CASE("property: with one cluster and frozen fading the aligned pair is optimal") {
  SimConfig c;
  c.clusters = 1;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    RngStreams rng(seed);
    RandomStream bs = rng.substream(RngStreams::kBuildings);
    const Scenario sc = defaultScenario(bs, c.ueSpeedMps);
    const ChannelModel ch(c, sc, rng, 20.0);
    const double t = 0.37 * static_cast<double>(seed);
    for (int j = 0; j < ch.links(); ++j) {
      const LinkSample s = ch.sample(j, t, false);
      const BeamPair aligned = dominantPair(s);
      const double best = pairSinrDb(s, aligned, ch.params());
      for (int u = 0; u < 8; ++u)
        for (int e = 0; e < 16; ++e) CHECK(pairSinrDb(s, BeamPair{u, e}, ch.params()) <= best);
    }
  }
}

TEST_CASE("noise floor dominates as pathloss grows") {
  const LinkParams p = LinkParams::fromConfig(SimConfig{});
  LinkSample s;
  s.clusters = {Cluster{}};
  s.clusterPairs = {BeamPair{0, 0}};
  double prev = 1e9;
  for (double pl = 100; pl <= 400; pl += 50) {
    s.pathlossDb = pl;
    const double v = pairSinrDb(s, BeamPair{1, 1}, p);  // G = -20 dB
    CHECK(v == doctest::Approx(30.0 - 20.0 - pl + 79.0));
    CHECK(v < prev);
    prev = v;
  }
  CHECK(prev < -200.0);
}

TEST_CASE("cluster power fractions sum to one") {
  SimConfig c;
  RngStreams rng(9);
  RandomStream bs = rng.substream(RngStreams::kBuildings);
  const Scenario sc = defaultScenario(bs, c.ueSpeedMps);
  const ChannelModel ch(c, sc, rng, 20.0);
  for (double t = 0.0; t < 20.0; t += 0.5) {
    for (const auto& s : ch.sampleAll(t)) {
      double sum = 0.0;
      for (const auto& cl : s.clusters) sum += cl.powerFraction;
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(s.clusters.size() == static_cast<std::size_t>(c.clusters));
    }
  }
}

TEST_CASE("large-scale state is constant within a 100 ms epoch; fast fading is not") {
  SimConfig c;
  RngStreams rng(4);
  RandomStream bs = rng.substream(RngStreams::kBuildings);
  const Scenario sc = defaultScenario(bs, c.ueSpeedMps);
  const ChannelModel ch(c, sc, rng, 20.0);
  const auto a = ch.sample(0, 1.2001);
  const auto b = ch.sample(0, 1.2500);
  const auto next = ch.sample(0, 1.3001);
  CHECK(a.shadowDb == b.shadowDb);
  CHECK(a.clusters[1].powerFraction == b.clusters[1].powerFraction);
  CHECK(a.shadowDb != next.shadowDb);
  int changes = 0;
  double prev = ch.sample(0, 1.2).fastDb;
  for (int k = 1; k < 40; ++k) {
    const double v = ch.sample(0, 1.2 + k * 125e-6).fastDb;
    changes += v != prev;
    prev = v;
  }
  CHECK(changes >= 35);
}

TEST_CASE("small-scale fading is clipped and has unit mean power") {
  double meanAcc = 0.0;
  const int seeds = 20;
  for (int seed = 0; seed < seeds; ++seed) {
    RandomStream s(static_cast<std::uint64_t>(seed));
    const SmallScaleFading f(s, 467.0, 8, 15.0);
    double lin = 0.0;
    int n = 0;
    for (double t = 0.0; t < 5.0; t += 125e-6, ++n) {
      const double g = f.gainDb(t, 1.0);
      CHECK(g >= -15.0);
      CHECK(g <= 15.0);
      lin += std::pow(10.0, g / 10.0);
    }
    meanAcc += lin / n;
  }
  CHECK(meanAcc / seeds == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("synthetic blockage traces") {
  BlockageShape shape;
  shape.meanGapS = 0.5;
  shape.meanDwellS = 0.3;
  RandomStream a(12);
  const auto tr = synthBlockageTrace(a, 60.0, shape);
  CHECK(tr.samples().size() == 480000);
  double deepest = 0.0;
  for (std::size_t k = 0; k < tr.samples().size(); ++k) {
    const double v = tr.samples()[k];
    CHECK(v <= 0.0);
    deepest = std::min(deepest, v);
    if (k > 0) CHECK(std::abs(v - tr.samples()[k - 1]) <= 0.2 * 0.125 + 1e-9);
  }
  CHECK(deepest >= -45.0);
  CHECK(deepest <= -25.0);

  RandomStream b(12);
  CHECK(synthBlockageTrace(b, 60.0, shape).samples() == tr.samples());

  RandomStream c(1);
  CHECK(synthBlockageTrace(c, 0.125e-3, shape).samples().size() == 1);
  CHECK_THROWS_AS(synthBlockageTrace(c, 0.0, shape), DomainError);
}

TEST_CASE("blockage depth stays within the sampled range") {
  BlockageShape shape;
  shape.meanGapS = 0.2;
  shape.meanDwellS = 1.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    RandomStream s(seed);
    const auto tr = synthBlockageTrace(s, 20.0, shape);
    for (double v : tr.samples()) {
      CHECK(v >= -40.0);
      CHECK(v <= 0.0);
    }
  }
}

TEST_CASE("imported blockage traces") {
  std::istringstream constant("blockage-trace v1, dt=125e-6\n-30\n-30\n-30\n");
  const auto c = parseBlockageTrace(constant);
  CHECK(c.samples() == std::vector<double>{-30, -30, -30});

  std::istringstream coarse("blockage-trace v1, dt=250e-6\n-1\n-2\n-3\n");
  const auto h = parseBlockageTrace(coarse);
  CHECK(h.samples() == std::vector<double>{-1, -1, -2, -2, -3, -3});
  CHECK(h.dt() == 125e-6);
  CHECK(h.at(0.0) == -1.0);
  CHECK(h.at(300e-6) == -2.0);

  std::istringstream empty("");
  CHECK_THROWS_AS(parseBlockageTrace(empty), ParseError);

  std::istringstream bad("blockage-trace v1, dt=125e-6\n-3\nabc\n");
  try {
    parseBlockageTrace(bad);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  std::istringstream positive("blockage-trace v1, dt=125e-6\n3\n");
  CHECK_THROWS_AS(parseBlockageTrace(positive), ParseError);
  std::istringstream tooDeep("blockage-trace v1, dt=125e-6\n-50\n");
  CHECK_THROWS_AS(parseBlockageTrace(tooDeep), ParseError);
  CHECK_THROWS_AS(importBlockageTrace("/nonexistent/trace.txt"), ParseError);
}

TEST_CASE("blockage trace write and parse round-trip") {
  RandomStream s(2);
  BlockageShape shape;
  const auto tr = synthBlockageTrace(s, 2.0, shape);
  std::stringstream buf;
  writeBlockageTrace(buf, tr);
  const auto back = parseBlockageTrace(buf);
  CHECK(back.samples() == tr.samples());
}

TEST_CASE("trace lookup holds or cycles past the end") {
  const BlockageTrace hold(1.0, {-1, -2}, false);
  const BlockageTrace cyc(1.0, {-1, -2}, true);
  CHECK(hold.at(5.0) == -2.0);
  CHECK(cyc.at(2.0) == -1.0);
  CHECK(cyc.at(3.0) == -2.0);
  CHECK(BlockageTrace().at(1.0) == 0.0);
}

TEST_CASE("mmWave rate map") {
  const SimConfig c;
  CHECK(mmwaveRateBps(-5.01, c) == 0.0);
  CHECK(mmwaveRateBps(0.0, c) == doctest::Approx(0.95 * 1e9));
  CHECK(mmwaveRateBps(37.7, c) == doctest::Approx(0.95 * 4.8e9));
  CHECK(mmwaveRateBps(-5.0, c) == doctest::Approx(0.95 * 1e9 * std::log2(1 + std::pow(10, -0.5))));
  double prev = 0.0;
  for (double g = -5.0; g < 40.0; g += 0.25) {
    const double r = mmwaveRateBps(g, c);
    CHECK(r >= prev);
    prev = r;
  }
}

TEST_CASE("LTE rate map") {
  CHECK(lteRateFromSinrBps(0.0, 20e6, 4.8, 0.0) == doctest::Approx(20e6));
  CHECK(lteRateFromSinrBps(60.0, 20e6, 4.8, 0.0) == doctest::Approx(96e6));
  const SimConfig c;
  RngStreams rng(1);
  RandomStream bs = rng.substream(RngStreams::kBuildings);
  const Scenario sc = defaultScenario(bs, c.ueSpeedMps);
  const ChannelModel ch(c, sc, rng, 20.0);
  const double mm = mmwaveRateBps(37.7, c);
  for (double t = 0.0; t <= 20.0; t += 0.5) {
    const double r = ch.lteRateBps(t);
    CHECK(r > 0.0);
    CHECK(r <= 96e6 + 1e-6);
    CHECK(r < mm);
  }
}

TEST_CASE("channel draws depend only on the seed") {
  const SimConfig c;
  RngStreams r1(21);
  RngStreams r2(21);
  RandomStream b1 = r1.substream(RngStreams::kBuildings);
  RandomStream b2 = r2.substream(RngStreams::kBuildings);
  const ChannelModel a(c, defaultScenario(b1, 5.0), r1, 20.0);
  const ChannelModel b(c, defaultScenario(b2, 5.0), r2, 20.0);
  for (double t = 0.0; t < 20.0; t += 0.77) {
    for (int j = 0; j < 3; ++j) CHECK(a.trueSinrDb(j, BeamPair{1, 2}, t) == b.trueSinrDb(j, BeamPair{1, 2}, t));
  }
}
