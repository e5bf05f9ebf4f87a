#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "abrsim/config.hpp"
#include "abrsim/event_queue.hpp"

namespace abrsim {

// TCP + IP + LLC/SNAP + AAL5 trailer bytes added to every segment.
constexpr std::uint64_t kEncapsulationBytes = 20 + 20 + 8 + 8;
constexpr std::uint64_t kCellPayloadBytes = 48;
constexpr SimTime kMaxRto = 64 * kNanosPerSecond;

/// ATM cells needed to carry one TCP segment of the given payload size.
std::uint64_t segment_to_cells(std::uint64_t payload_bytes);

/// RTO from smoothed estimates: rounded up to whole timer ticks and clamped to
/// [2 ticks, 64 s].
SimTime rto_from_estimates(SimTime srtt, SimTime rttvar, SimTime granularity);

struct Segment {
  std::uint32_t vc = 0;
  std::uint64_t seq = 0;
  std::uint32_t len = 0;  // 0 for a pure ACK
  std::uint64_t ack = 0;
  std::uint64_t window = 0;
  SimTime send_timestamp = 0;
};

enum class TimerAction { kNone, kStart, kRestart, kStop };

/// Bulk-transfer sender with slow start, congestion avoidance and coarse
/// timeouts (go-back-N, no fast retransmit). Timer scheduling is left to the
/// owner; the sender reports what should happen to the timer.
class TcpSender {
 public:
  TcpSender(std::uint32_t vc, const TcpParams& params);

  /// Emits every full segment the usable window allows.
  std::vector<Segment> on_send_opportunity(SimTime now);
  TimerAction on_ack(const Segment& ack, SimTime now);
  /// Collapses the window and rewinds to snd_una. The caller restarts the
  /// timer and calls on_send_opportunity.
  void on_timeout(SimTime now);

  std::uint64_t usable_window() const;
  bool timer_running() const { return timer_running_; }
  bool has_outstanding() const { return snd_una_ < snd_max_; }

  std::uint64_t snd_una() const { return snd_una_; }
  std::uint64_t snd_nxt() const { return snd_nxt_; }
  std::uint64_t snd_max() const { return snd_max_; }
  std::uint64_t cwnd() const { return cwnd_; }
  std::uint64_t ssthresh() const { return ssthresh_; }
  SimTime rto() const { return rto_; }
  SimTime srtt() const { return srtt_; }
  SimTime rttvar() const { return rttvar_; }
  std::uint64_t timeouts() const { return timeouts_; }
  std::uint64_t retransmitted_segments() const { return retransmitted_; }

  // Test hooks for placing the sender in a given window state.
  void set_cwnd(std::uint64_t cwnd) { cwnd_ = cwnd; }
  void set_ssthresh(std::uint64_t ssthresh) { ssthresh_ = ssthresh; }
  void set_rto(SimTime rto) { rto_ = rto; }

 private:
  std::uint32_t vc_;
  TcpParams params_;
  std::uint64_t mss_;
  std::uint64_t snd_una_ = 0;
  std::uint64_t snd_nxt_ = 0;
  std::uint64_t snd_max_ = 0;
  std::uint64_t cwnd_;
  std::uint64_t ssthresh_;
  std::uint64_t rcv_window_;

  bool have_rtt_ = false;
  SimTime srtt_ = 0;
  SimTime rttvar_ = 0;
  SimTime rto_;

  // One timed segment at a time; retransmissions are never timed (Karn).
  bool timing_ = false;
  std::uint64_t timed_seq_ = 0;
  SimTime timed_start_ = 0;

  bool timer_running_ = false;
  std::uint64_t timeouts_ = 0;
  std::uint64_t retransmitted_ = 0;
};

/// Cumulative-ACK receiver with an out-of-order store; one ACK per data segment.
class TcpReceiver {
 public:
  TcpReceiver(std::uint32_t vc, const TcpParams& params);

  Segment on_segment_arrival(const Segment& seg, SimTime now);

  std::uint64_t rcv_nxt() const { return rcv_nxt_; }
  // In-order bytes handed to the application.
  std::uint64_t delivered_bytes() const { return rcv_nxt_; }
  std::size_t out_of_order_ranges() const { return out_of_order_.size(); }
  std::uint64_t duplicate_segments() const { return duplicates_; }

 private:
  std::uint32_t vc_;
  std::uint64_t window_;
  std::uint64_t rcv_nxt_ = 0;
  std::map<std::uint64_t, std::uint64_t> out_of_order_;  // start -> end
  std::uint64_t duplicates_ = 0;
};

}  // namespace abrsim
