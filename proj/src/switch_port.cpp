#include "abrsim/switch_port.hpp"

#include <algorithm>
#include <stdexcept>

namespace abrsim {

SwitchPort::SwitchPort(EventQueue& events, const EricaParams& params, double link_cell_rate,
                       SimTime cell_time, std::uint32_t n_vcs,
                       std::optional<std::uint64_t> capacity, DepartureHandler on_departure)
    : events_(events),
      erica_(params, link_cell_rate, n_vcs),
      cell_time_(cell_time),
      capacity_(capacity),
      on_departure_(std::move(on_departure)) {
  if (cell_time_ == 0) throw std::invalid_argument("cell time must be positive");
}

void SwitchPort::start() {
  erica_.end_interval(events_.now(), 0);
  arm_interval_timer();
}

void SwitchPort::arm_interval_timer() {
  events_.cancel(interval_timer_);
  interval_timer_ = events_.schedule_in(erica_.params().interval_time, [this] { close_interval(); });
}

void SwitchPort::close_interval() {
  erica_.end_interval(events_.now(), abr_queue_.size());
  arm_interval_timer();
}

void SwitchPort::on_cell(const Cell& cell) {
  switch (cell.kind) {
    case CellKind::kVbr:
      ++vbr_in_;
      ++vbr_pending_;
      erica_.on_vbr_cell();
      break;
    case CellKind::kData:
    case CellKind::kForwardRm: {
      ++abr_in_;
      const bool interval_full =
          erica_.on_abr_cell(cell.vc, cell.kind == CellKind::kForwardRm, cell.rm.ccr);
      if (capacity_ && abr_queue_.size() >= *capacity_) {
        ++abr_dropped_;
      } else {
        abr_queue_.push_back(cell);
        max_queue_seen_ = std::max<std::uint64_t>(max_queue_seen_, abr_queue_.size());
        window_max_ = std::max<std::uint64_t>(window_max_, abr_queue_.size());
      }
      if (interval_full) close_interval();
      break;
    }
    case CellKind::kBackwardRm:
      throw std::logic_error("BRM cells use the reverse path, not the output queue");
  }
  serve();
}

void SwitchPort::stamp_brm(Cell& brm) const {
  brm.rm.er = std::min(brm.rm.er, erica_.compute_er(brm.vc));
}

std::uint64_t SwitchPort::take_window_max() {
  std::uint64_t m = window_max_;
  window_max_ = abr_queue_.size();
  return m;
}

void SwitchPort::serve() {
  if (busy_) return;
  if (vbr_pending_ > 0) {
    --vbr_pending_;
  } else if (!abr_queue_.empty()) {
    in_service_ = abr_queue_.front();
    abr_queue_.pop_front();
  } else {
    return;
  }
  busy_ = true;
  events_.schedule_in(cell_time_, [this] { on_transmit_done(); });
}

void SwitchPort::on_transmit_done() {
  busy_ = false;
  if (in_service_) {
    Cell done = *in_service_;
    in_service_.reset();
    ++abr_out_;
    on_departure_(done, events_.now());
  } else {
    ++vbr_out_;
  }
  serve();
  if (!busy_ && (vbr_pending_ > 0 || !abr_queue_.empty())) ++idle_with_backlog_;
}

}  // namespace abrsim
