#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>

#include "abrsim/cell.hpp"
#include "abrsim/erica.hpp"
#include "abrsim/event_queue.hpp"

namespace abrsim {

/// Output port of the bottleneck switch: an ABR FIFO, strict priority for VBR
/// cells, and an ERICA engine that measures the forward input and stamps
/// backward RM cells.
class SwitchPort {
 public:
  // Called when an ABR cell finishes transmission on the output link.
  using DepartureHandler = std::function<void(const Cell&, SimTime)>;

  SwitchPort(EventQueue& events, const EricaParams& params, double link_cell_rate,
             SimTime cell_time, std::uint32_t n_vcs, std::optional<std::uint64_t> capacity,
             DepartureHandler on_departure);

  SwitchPort(const SwitchPort&) = delete;
  SwitchPort& operator=(const SwitchPort&) = delete;

  /// Opens the first averaging interval at the current clock.
  void start();

  /// A forward ABR cell (data or FRM) or a VBR cell reaches the port.
  void on_cell(const Cell& cell);
  /// Writes min(carried ER, computed ER) into a BRM travelling back through
  /// this switch.
  void stamp_brm(Cell& brm) const;

  std::size_t abr_queue_length() const { return abr_queue_.size(); }
  std::size_t vbr_pending() const { return vbr_pending_; }
  std::uint64_t max_queue_seen() const { return max_queue_seen_; }
  /// Largest ABR queue since the previous call.
  std::uint64_t take_window_max();
  bool busy() const { return busy_; }
  bool serving_abr() const { return in_service_.has_value(); }

  const EricaPort& erica() const { return erica_; }

  std::uint64_t abr_arrivals() const { return abr_in_; }
  std::uint64_t abr_departures() const { return abr_out_; }
  std::uint64_t abr_drops() const { return abr_dropped_; }
  std::uint64_t vbr_arrivals() const { return vbr_in_; }
  std::uint64_t vbr_departures() const { return vbr_out_; }
  std::uint64_t link_idle_with_backlog() const { return idle_with_backlog_; }

 private:
  void serve();
  void on_transmit_done();
  void close_interval();
  void arm_interval_timer();

  EventQueue& events_;
  EricaPort erica_;
  SimTime cell_time_;
  std::optional<std::uint64_t> capacity_;
  DepartureHandler on_departure_;

  std::deque<Cell> abr_queue_;
  std::size_t vbr_pending_ = 0;
  bool busy_ = false;
  std::optional<Cell> in_service_;
  EventHandle interval_timer_;

  std::uint64_t max_queue_seen_ = 0;
  std::uint64_t window_max_ = 0;
  std::uint64_t abr_in_ = 0;
  std::uint64_t abr_out_ = 0;
  std::uint64_t abr_dropped_ = 0;
  std::uint64_t vbr_in_ = 0;
  std::uint64_t vbr_out_ = 0;
  std::uint64_t idle_with_backlog_ = 0;
};

}  // namespace abrsim
