#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <map>
#include <vector>

#include "mcsim/dataplane.hpp"

using namespace mcsim;

namespace {

constexpr std::int64_t kPdu = 1024;

std::vector<Sn> serveAll(RlcBuffer& b, std::int64_t budget) {
  std::vector<Sn> out;
  b.serve(budget, [&](Sn sn) { out.push_back(sn); });
  return out;
}

}  // namespace

TEST_CASE("UDP source counts") {
  CHECK(UdpSource(20e-6, 20.0).totalPdus() == 1000000);
  CHECK(UdpSource(80e-6, 20.0).totalPdus() == 250000);
  CHECK(UdpSource(20e-6, 20.0).offeredRateBps(kPdu) == doctest::Approx(409.6e6));
  CHECK_THROWS_AS(UdpSource(0.0, 1.0), DomainError);
}

TEST_CASE("UDP source emits on the interval grid") {
  UdpSource src(80e-6, 1e-3);
  std::vector<std::int64_t> got;
  src.emitUntil(400000, [&](std::int64_t c) { got.push_back(c); });
  CHECK(got == std::vector<std::int64_t>{0, 80000, 160000, 240000, 320000});
  src.emitUntil(SimTime::fromSeconds(1.0).ns, [&](std::int64_t c) { got.push_back(c); });
  CHECK(got.size() == 12);
  CHECK(got.back() == 880000);
}

TEST_CASE("drop-tail boundary is inclusive") {
  RlcBuffer b(3 * kPdu, kPdu);
  CHECK((b.enqueue(0) == EnqueueResult::Accepted));
  CHECK((b.enqueue(1) == EnqueueResult::Accepted));
  // exactly one PDU of room left
  CHECK((b.enqueue(2) == EnqueueResult::Accepted));
  CHECK((b.enqueue(3) == EnqueueResult::DroppedOverflow));
  CHECK(b.queuedBytes() == 3 * kPdu);

  RlcBuffer big(10'000'000, kPdu);
  CHECK((big.enqueue(0) == EnqueueResult::Accepted));
}

TEST_CASE("slot budget") {
  CHECK(slotBudgetBytes(0.0, 125e-6) == 0);
  CHECK(slotBudgetBytes(4.56e9, 125e-6) == 71250);
  CHECK(71250 / kPdu == 69);
}

TEST_CASE("serving carries partial progress across slots") {
  RlcBuffer b(100 * kPdu, kPdu);
  for (Sn s = 0; s < 3; ++s) b.enqueue(s);
  CHECK(serveAll(b, 0).empty());
  CHECK(serveAll(b, 1536) == std::vector<Sn>{0});
  CHECK(b.headSentBytes() == 512);
  CHECK(serveAll(b, 512) == std::vector<Sn>{1});
  CHECK(b.headSentBytes() == 0);
  CHECK(serveAll(b, 5000) == std::vector<Sn>{2});
  CHECK(b.empty());
}

TEST_CASE("forwarding drain splits whole and partial PDUs") {
  RlcBuffer empty(10 * kPdu, kPdu);
  auto d0 = empty.drainForForwarding();
  CHECK(d0.whole.empty());
  CHECK_FALSE(d0.partial.has_value());

  RlcBuffer b(1000 * kPdu, kPdu);
  for (Sn s = 0; s < 101; ++s) b.enqueue(s);
  serveAll(b, 100);
  const auto d = b.drainForForwarding();
  CHECK(d.whole.size() == 100);
  REQUIRE(d.partial.has_value());
  CHECK(*d.partial == 0);
  CHECK(d.whole.front() == 1);
  CHECK(b.empty());
  CHECK(b.headSentBytes() == 0);
}

TEST_CASE("forwarding into a nearly full target overflows") {
  RlcBuffer target(5 * kPdu, kPdu);
  for (Sn s = 100; s < 103; ++s) target.enqueue(s);
  int dropped = 0;
  for (Sn s = 0; s < 5; ++s) dropped += target.enqueue(s) == EnqueueResult::DroppedOverflow;
  CHECK(dropped == 3);
  // forwarded lower SNs sit ahead of fresh ones
  CHECK(target.contents().front() == 0);
  CHECK(target.contents()[1] == 1);
}

TEST_CASE("lower SNs never jump a partially sent head") {
  RlcBuffer b(10 * kPdu, kPdu);
  b.enqueue(10);
  b.enqueue(11);
  serveAll(b, 10);
  b.enqueue(3);
  CHECK(b.contents()[0] == 10);
  CHECK(b.contents()[1] == 3);
}

TEST_CASE("delay link delivers after its delay in send order") {
  DelayLink x2(1e-3);
  CHECK(x2.delayNs() == 1000000);
  x2.send(0, 5, 2, kPdu);
  x2.send(0, 6, 2, kPdu);
  x2.send(10, 4, 3, kPdu);
  CHECK(x2.bytesCarried() == 3 * kPdu);
  std::vector<Sn> got;
  x2.deliverUntil(999999, [&](const DelayLink::InFlight& f) { got.push_back(f.sn); });
  CHECK(got.empty());
  x2.deliverUntil(1000000, [&](const DelayLink::InFlight& f) {
    got.push_back(f.sn);
    CHECK(f.arrivalNs == 1000000);
  });
  CHECK(got == std::vector<Sn>{5, 6});
  x2.deliverUntil(2000000, [&](const DelayLink::InFlight& f) { got.push_back(f.sn); });
  CHECK(got == std::vector<Sn>{5, 6, 4});
  CHECK(x2.inFlight() == 0);
}

TEST_CASE("PDCP receiver releases in order and skips known losses") {
  PduLog log;
  for (int i = 0; i < 5; ++i) log.create(i * 1000);
  PdcpReceiver rx(log);
  std::vector<Sn> released;
  rx.setReleaseHook([&](Sn sn, std::int64_t) { released.push_back(sn); });
  rx.receive(1, 5000);
  CHECK(released.empty());
  CHECK(rx.held() == 1);
  rx.receive(0, 6000);
  CHECK(released == std::vector<Sn>{0, 1});
  CHECK(log[1].deliveredNs == 6000);
  rx.receive(3, 7000);
  log[2].fate = PduFate::DroppedSegmentation;
  rx.lost(2, 8000);
  CHECK(released == std::vector<Sn>{0, 1, 3});
  CHECK(log[3].deliveredNs == 8000);
  CHECK(*log[3].latencyS() == doctest::Approx(5e-6));
  CHECK(rx.nextExpected() == 4);
  CHECK_FALSE(log[4].latencyS().has_value());
}

// A random two-cell system: fresh PDUs, random switches with forwarding over a
// delay link, random slot budgets and capacity. Checks conservation at every
// step, strictly increasing release order and work conservation.
TEST_CASE("property: conservation, ordering and work conservation under random switching") {
  RandomStream rng(99);
  for (int trial = 0; trial < 60; ++trial) {
    PduLog log;
    PdcpReceiver rx(log);
    Sn lastReleased = 0;
    bool any = false;
    bool ordered = true;
    rx.setReleaseHook([&](Sn sn, std::int64_t) {
      if (any && sn <= lastReleased) ordered = false;
      lastReleased = sn;
      any = true;
    });
    const std::int64_t cap = (5 + static_cast<std::int64_t>(rng.next() % 60)) * kPdu;
    std::vector<RlcBuffer> cells{RlcBuffer(cap, kPdu), RlcBuffer(cap, kPdu)};
    DelayLink x2(1e-3);
    int serving = 0;
    std::int64_t overflow = 0;
    std::int64_t segmentation = 0;
    std::int64_t delivered = 0;
    auto drop = [&](Sn sn, PduFate f, std::int64_t now) {
      log[sn].fate = f;
      (f == PduFate::DroppedOverflow ? overflow : segmentation) += 1;
      rx.lost(sn, now);
    };
    const std::int64_t slot = 125000;
    for (int k = 0; k < 4000; ++k) {
      const std::int64_t now = k * slot;
      x2.deliverUntil(now, [&](const DelayLink::InFlight& f) {
        if (cells[static_cast<std::size_t>(f.dest)].enqueue(f.sn) == EnqueueResult::DroppedOverflow)
          drop(f.sn, PduFate::DroppedOverflow, now);
      });
      for (int j = 0; j < 6; ++j) {
        const Sn sn = log.create(now);
        x2.send(now, sn, serving, kPdu);
      }
      if (rng.uniform() < 0.01) {
        auto d = cells[static_cast<std::size_t>(serving)].drainForForwarding();
        serving = 1 - serving;
        if (d.partial) drop(*d.partial, PduFate::DroppedSegmentation, now);
        for (Sn sn : d.whole) x2.send(now, sn, serving, kPdu);
      }
      auto& buf = cells[static_cast<std::size_t>(serving)];
      const std::int64_t budget = rng.uniform() < 0.2 ? 0 : static_cast<std::int64_t>(rng.next() % 9000);
      const bool hadWork = !buf.empty();
      const std::int64_t sent = buf.serve(budget, [&](Sn sn) {
        ++delivered;
        rx.receive(sn, now);
      });
      if (hadWork && budget > 0) REQUIRE(sent > 0);
      const auto inFlight = static_cast<std::int64_t>(x2.inFlight());
      const auto buffered = static_cast<std::int64_t>(cells[0].size() + cells[1].size());
      REQUIRE(static_cast<std::int64_t>(log.size()) ==
              delivered + overflow + segmentation + buffered + inFlight);
    }
    CHECK(ordered);
    // every received PDU is released once all earlier fates are settled
    for (auto& c : cells) {
      auto d = c.drainForForwarding();
      if (d.partial) drop(*d.partial, PduFate::DroppedSegmentation, 1LL << 40);
      for (Sn sn : d.whole) drop(sn, PduFate::DroppedOverflow, 1LL << 40);
    }
    x2.deliverUntil(1LL << 41, [&](const DelayLink::InFlight& f) { drop(f.sn, PduFate::DroppedOverflow, 1LL << 40); });
    CHECK(rx.held() == 0);
    CHECK(rx.nextExpected() == log.size());
  }
}
