#include "mcsim/dataplane.hpp"

#include <algorithm>
#include <cmath>

namespace mcsim {

const char* toString(PduFate f) {
  switch (f) {
    case PduFate::Pending: return "pending";
    case PduFate::Delivered: return "delivered";
    case PduFate::DroppedOverflow: return "dropped-overflow";
    case PduFate::DroppedSegmentation: return "dropped-segmentation";
  }
  return "?";
}

Sn PduLog::create(std::int64_t createdNs) {
  const auto sn = static_cast<Sn>(pdus_.size());
  pdus_.push_back(PdcpPdu{sn, createdNs, -1, PduFate::Pending});
  return sn;
}

UdpSource::UdpSource(double intervalS, double durationS) : intervalS_(intervalS) {
  if (!(intervalS > 0.0)) throw DomainError("UDP interval must be > 0");
  // tolerate representation error in ratios such as 20 / 20e-6
  total_ = static_cast<std::int64_t>(std::floor(durationS / intervalS * (1.0 + 1e-12)));
}

std::int64_t UdpSource::creationNs(std::int64_t n) const {
  return std::llround(static_cast<double>(n) * intervalS_ * 1e9);
}

RlcBuffer::RlcBuffer(std::int64_t capacityBytes, std::int64_t pduBytes)
    : capacity_(capacityBytes), pduBytes_(pduBytes) {
  if (capacityBytes <= 0 || pduBytes <= 0) throw DomainError("buffer and PDU sizes must be > 0");
}

EnqueueResult RlcBuffer::enqueue(Sn sn) {
  if (queuedBytes() + pduBytes_ > capacity_) return EnqueueResult::DroppedOverflow;
  if (queue_.empty() || queue_.back() < sn) {
    queue_.push_back(sn);
    return EnqueueResult::Accepted;
  }
  auto first = queue_.begin() + (headSent_ > 0 ? 1 : 0);
  queue_.insert(std::upper_bound(first, queue_.end(), sn), sn);
  return EnqueueResult::Accepted;
}

std::int64_t RlcBuffer::serve(std::int64_t budgetBytes, const std::function<void(Sn)>& onDelivered) {
  std::int64_t sent = 0;
  while (budgetBytes > 0 && !queue_.empty()) {
    const std::int64_t need = pduBytes_ - headSent_;
    if (budgetBytes >= need) {
      budgetBytes -= need;
      sent += need;
      const Sn sn = queue_.front();
      queue_.pop_front();
      headSent_ = 0;
      onDelivered(sn);
    } else {
      headSent_ += budgetBytes;
      sent += budgetBytes;
      budgetBytes = 0;
    }
  }
  return sent;
}

RlcBuffer::Drained RlcBuffer::drainForForwarding() {
  Drained d;
  if (!queue_.empty() && headSent_ > 0) {
    d.partial = queue_.front();
    queue_.pop_front();
  }
  d.whole.assign(queue_.begin(), queue_.end());
  queue_.clear();
  headSent_ = 0;
  return d;
}

std::int64_t slotBudgetBytes(double rateBps, double slotS) {
  if (!(rateBps > 0.0)) return 0;
  // rates such as 4.56 Gb/s give exact integers; guard against 71249.999
  return static_cast<std::int64_t>(std::floor(rateBps * slotS / 8.0 + 1e-9));
}

void DelayLink::send(std::int64_t sendNs, Sn sn, int dest, std::int64_t bytes) {
  heap_.push_back(InFlight{sendNs + delayNs_, seq_++, sn, dest});
  std::push_heap(heap_.begin(), heap_.end(), Later{});
  bytes_ += bytes;
}

void PdcpReceiver::receive(Sn sn, std::int64_t nowNs) {
  if (received_.size() <= sn) received_.resize(std::max<std::size_t>(sn + 1, received_.size() * 2), 0);
  received_[sn] = 1;
  ++heldCount_;
  advance(nowNs);
}

void PdcpReceiver::lost(Sn, std::int64_t nowNs) { advance(nowNs); }

void PdcpReceiver::advance(std::int64_t nowNs) {
  while (next_ < log_.size()) {
    PdcpPdu& p = log_[next_];
    if (next_ < received_.size() && received_[next_]) {
      p.deliveredNs = nowNs;
      p.fate = PduFate::Delivered;
      --heldCount_;
      if (hook_) hook_(next_, nowNs);
    } else if (p.fate != PduFate::DroppedOverflow && p.fate != PduFate::DroppedSegmentation) {
      break;
    }
    ++next_;
  }
}

}  // namespace mcsim
