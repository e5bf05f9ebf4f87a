#include "abrsim/tcp.hpp"

#include <algorithm>

namespace abrsim {

std::uint64_t segment_to_cells(std::uint64_t payload_bytes) {
  return (payload_bytes + kEncapsulationBytes + kCellPayloadBytes - 1) / kCellPayloadBytes;
}

SimTime rto_from_estimates(SimTime srtt, SimTime rttvar, SimTime granularity) {
  const SimTime raw = srtt + 4 * rttvar;
  SimTime rto = (raw + granularity - 1) / granularity * granularity;
  return std::clamp(rto, 2 * granularity, kMaxRto);
}

TcpSender::TcpSender(std::uint32_t vc, const TcpParams& params)
    : vc_(vc),
      params_(params),
      mss_(params.mss_bytes),
      cwnd_(params.mss_bytes),
      ssthresh_(params.max_rcv_window()),
      rcv_window_(params.max_rcv_window()),
      rto_(params.initial_rto) {}

std::uint64_t TcpSender::usable_window() const {
  const std::uint64_t window = std::min(cwnd_, rcv_window_);
  const std::uint64_t in_flight = snd_nxt_ - snd_una_;
  return window > in_flight ? window - in_flight : 0;
}

std::vector<Segment> TcpSender::on_send_opportunity(SimTime now) {
  std::vector<Segment> out;
  while (usable_window() >= mss_) {
    Segment seg;
    seg.vc = vc_;
    seg.seq = snd_nxt_;
    seg.len = static_cast<std::uint32_t>(mss_);
    seg.send_timestamp = now;
    if (snd_nxt_ < snd_max_) {
      ++retransmitted_;
    } else if (!timing_) {
      timing_ = true;
      timed_seq_ = snd_nxt_;
      timed_start_ = now;
    }
    snd_nxt_ += mss_;
    snd_max_ = std::max(snd_max_, snd_nxt_);
    out.push_back(seg);
  }
  if (!out.empty() && !timer_running_) timer_running_ = true;
  return out;
}

TimerAction TcpSender::on_ack(const Segment& ack, SimTime now) {
  rcv_window_ = std::min<std::uint64_t>(ack.window, params_.max_rcv_window());
  if (ack.ack <= snd_una_ || ack.ack > snd_max_) return TimerAction::kNone;

  if (timing_ && ack.ack > timed_seq_) {
    const SimTime sample = now - timed_start_;
    if (!have_rtt_) {
      srtt_ = sample;
      rttvar_ = sample / 2;
      have_rtt_ = true;
    } else {
      const SimTime err = sample > srtt_ ? sample - srtt_ : srtt_ - sample;
      // srtt += (sample - srtt) / 8; rttvar += (|err| - rttvar) / 4
      srtt_ = (7 * srtt_ + sample) / 8;
      rttvar_ = (3 * rttvar_ + err) / 4;
    }
    rto_ = rto_from_estimates(srtt_, rttvar_, params_.timer_granularity);
    timing_ = false;
  }

  snd_una_ = ack.ack;
  if (snd_nxt_ < snd_una_) snd_nxt_ = snd_una_;

  if (cwnd_ < ssthresh_) {
    cwnd_ += mss_;
  } else {
    cwnd_ += std::max<std::uint64_t>(1, mss_ * mss_ / cwnd_);
  }
  cwnd_ = std::min(cwnd_, params_.max_rcv_window());

  if (snd_una_ == snd_max_) {
    timer_running_ = false;
    return TimerAction::kStop;
  }
  timer_running_ = true;
  return TimerAction::kRestart;
}

void TcpSender::on_timeout(SimTime /*now*/) {
  if (!has_outstanding()) {
    timer_running_ = false;
    return;
  }
  ++timeouts_;
  ssthresh_ = std::max(cwnd_ / 2, 2 * mss_);
  cwnd_ = mss_;
  snd_nxt_ = snd_una_;
  rto_ = std::min(rto_ * 2, kMaxRto);
  timing_ = false;
  timer_running_ = true;
}

TcpReceiver::TcpReceiver(std::uint32_t vc, const TcpParams& params)
    : vc_(vc), window_(params.max_rcv_window()) {}

Segment TcpReceiver::on_segment_arrival(const Segment& seg, SimTime now) {
  const std::uint64_t end = seg.seq + seg.len;
  if (seg.len > 0) {
    if (seg.seq == rcv_nxt_) {
      rcv_nxt_ = end;
      // Absorb any buffered ranges that are now contiguous.
      auto it = out_of_order_.begin();
      while (it != out_of_order_.end() && it->first <= rcv_nxt_) {
        rcv_nxt_ = std::max(rcv_nxt_, it->second);
        it = out_of_order_.erase(it);
      }
    } else if (seg.seq > rcv_nxt_) {
      auto [it, inserted] = out_of_order_.emplace(seg.seq, end);
      if (!inserted) {
        ++duplicates_;
        it->second = std::max(it->second, end);
      }
    } else {
      ++duplicates_;
    }
  }
  Segment ack;
  ack.vc = vc_;
  ack.seq = 0;
  ack.len = 0;
  ack.ack = rcv_nxt_;
  ack.window = window_;
  ack.send_timestamp = now;
  return ack;
}

}  // namespace abrsim
