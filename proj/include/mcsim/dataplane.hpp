// User plane: UDP source, RLC drop-tail buffers, X2/S1 transport, per-slot
// air service and the UE-side PDCP in-order receiver.

#ifndef MCSIM_DATAPLANE_HPP
#define MCSIM_DATAPLANE_HPP

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <vector>

#include "mcsim/engine.hpp"

namespace mcsim {

using Sn = std::uint32_t;

enum class PduFate : std::uint8_t { Pending, Delivered, DroppedOverflow, DroppedSegmentation };

const char* toString(PduFate f);

struct PdcpPdu {
  Sn sn = 0;
  std::int64_t createdNs = 0;
  std::int64_t deliveredNs = -1;
  PduFate fate = PduFate::Pending;

  std::optional<double> latencyS() const {
    if (deliveredNs < 0) return std::nullopt;
    return static_cast<double>(deliveredNs - createdNs) * 1e-9;
  }
};

/// Every PDU of a run, indexed by sequence number.
class PduLog {
 public:
  Sn create(std::int64_t createdNs);
  PdcpPdu& operator[](Sn sn) { return pdus_[sn]; }
  const PdcpPdu& operator[](Sn sn) const { return pdus_[sn]; }
  std::size_t size() const { return pdus_.size(); }
  void reserve(std::size_t n) { pdus_.reserve(n); }
  const std::vector<PdcpPdu>& all() const { return pdus_; }

 private:
  std::vector<PdcpPdu> pdus_;
};

/// PDUs generated at t = n * interval for n = 0 .. floor(duration/interval) - 1.
class UdpSource {
 public:
  UdpSource(double intervalS, double durationS);

  std::int64_t totalPdus() const { return total_; }
  /// Creation times (ns) of every PDU with creation time < untilNs not yet emitted.
  template <typename F>
  void emitUntil(std::int64_t untilNs, F&& onPdu) {
    while (next_ < total_) {
      const std::int64_t c = creationNs(next_);
      if (c >= untilNs) break;
      onPdu(c);
      ++next_;
    }
  }
  std::int64_t creationNs(std::int64_t n) const;
  double offeredRateBps(std::int64_t payloadBytes) const {
    return static_cast<double>(payloadBytes) * 8.0 / intervalS_;
  }

 private:
  double intervalS_;
  std::int64_t total_;
  std::int64_t next_ = 0;
};

enum class EnqueueResult { Accepted, DroppedOverflow };

/// FIFO of equal-size PDUs ordered by SN, with a partially sent head.
class RlcBuffer {
 public:
  RlcBuffer(std::int64_t capacityBytes, std::int64_t pduBytes);

  std::int64_t capacity() const { return capacity_; }
  std::int64_t queuedBytes() const { return static_cast<std::int64_t>(queue_.size()) * pduBytes_; }
  std::size_t size() const { return queue_.size(); }
  bool empty() const { return queue_.empty(); }
  std::int64_t headSentBytes() const { return headSent_; }
  const std::deque<Sn>& contents() const { return queue_; }

  /// Drop-tail with an inclusive boundary. Lower SNs are placed ahead of
  /// higher ones, but never ahead of a partially transmitted head.
  EnqueueResult enqueue(Sn sn);

  /// Sends up to budgetBytes from the head; `onDelivered` gets each PDU whose
  /// last byte went out. Returns bytes sent.
  std::int64_t serve(std::int64_t budgetBytes, const std::function<void(Sn)>& onDelivered);

  struct Drained {
    std::vector<Sn> whole;
    std::optional<Sn> partial;
  };
  /// Empties the buffer: untransmitted PDUs to forward, plus the partially
  /// sent head (lost to segmentation).
  Drained drainForForwarding();

 private:
  std::int64_t capacity_;
  std::int64_t pduBytes_;
  std::deque<Sn> queue_;
  std::int64_t headSent_ = 0;
};

/// Bytes per slot for a link rate, floored to whole bytes.
std::int64_t slotBudgetBytes(double rateBps, double slotS);

/// Constant-delay link with a byte counter. Arrivals pop in (arrival, send
/// order), so equal-time sends stay FIFO.
class DelayLink {
 public:
  struct InFlight {
    std::int64_t arrivalNs;
    std::uint64_t seq;
    Sn sn;
    int dest;
  };

  explicit DelayLink(double delayS) : delayNs_(SimTime::fromSeconds(delayS).ns) {}

  std::int64_t delayNs() const { return delayNs_; }
  std::int64_t bytesCarried() const { return bytes_; }
  std::size_t inFlight() const { return heap_.size(); }

  void send(std::int64_t sendNs, Sn sn, int dest, std::int64_t bytes);

  /// Pops every PDU with arrival <= nowNs in arrival order.
  template <typename F>
  void deliverUntil(std::int64_t nowNs, F&& onArrival) {
    while (!heap_.empty() && heap_.front().arrivalNs <= nowNs) {
      std::pop_heap(heap_.begin(), heap_.end(), Later{});
      const InFlight f = heap_.back();
      heap_.pop_back();
      onArrival(f);
    }
  }
  const std::vector<InFlight>& pending() const { return heap_; }

 private:
  struct Later {
    bool operator()(const InFlight& a, const InFlight& b) const {
      return a.arrivalNs != b.arrivalNs ? a.arrivalNs > b.arrivalNs : a.seq > b.seq;
    }
  };
  std::int64_t delayNs_;
  std::int64_t bytes_ = 0;
  std::uint64_t seq_ = 0;
  std::vector<InFlight> heap_;
};

/// UE-side PDCP: releases PDUs to the application strictly in SN order,
/// skipping SNs whose loss is already known.
class PdcpReceiver {
 public:
  explicit PdcpReceiver(PduLog& log) : log_(log) {}

  /// Marks `sn` received at nowNs and releases everything now in order.
  void receive(Sn sn, std::int64_t nowNs);
  /// Called when a PDU is dropped so the in-order pointer can skip it.
  void lost(Sn sn, std::int64_t nowNs);

  Sn nextExpected() const { return next_; }
  std::size_t held() const { return heldCount_; }

  void setReleaseHook(std::function<void(Sn, std::int64_t)> hook) { hook_ = std::move(hook); }

 private:
  void advance(std::int64_t nowNs);

  PduLog& log_;
  std::vector<std::uint8_t> received_;
  Sn next_ = 0;
  std::size_t heldCount_ = 0;
  std::function<void(Sn, std::int64_t)> hook_;
};

}  // namespace mcsim

#endif  // MCSIM_DATAPLANE_HPP
