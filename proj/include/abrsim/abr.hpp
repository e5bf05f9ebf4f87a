#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>

#include "abrsim/cell.hpp"
#include "abrsim/event_queue.hpp"

namespace abrsim {

struct AbrSourceParams {
  double icr = 0.0;        // cells/s
  double pcr = 0.0;        // cells/s
  double acr_floor = 0.0;  // cells/s, stands in for MCR
  std::uint32_t nrm = 32;
  std::optional<std::uint64_t> capacity;  // nullopt = infinite queue
  bool infinite_demand = false;
};

/// Builds the source parameters used by the simulator for a link of the given
/// cell rate: PCR is the link rate and the ACR floor is 1/10000 of it.
AbrSourceParams make_source_params(double link_cell_rate, double icr,
                                   std::optional<std::uint64_t> capacity, std::uint32_t nrm,
                                   bool infinite_demand);

/// ABR source end system for one VC: a tail-drop FIFO fed by TCP, shaped at
/// ACR, with one forward RM cell in every Nrm cells sent.
class AbrSource {
 public:
  struct Departure {
    Cell cell;
    SimTime at;
  };

  AbrSource(std::uint32_t vc, const AbrSourceParams& params);

  /// Appends cells until the queue is full; the rest are dropped.
  std::size_t enqueue_from_tcp(std::span<const Cell> cells);

  bool has_cell_ready() const { return params_.infinite_demand || !queue_.empty(); }
  /// Earliest instant the next cell may leave: max(now, last send + 1/ACR).
  SimTime earliest_departure(SimTime now) const;
  /// Sends the next cell. Every Nrm-th cell is an FRM carrying ccr = ACR.
  Departure next_cell_departure(SimTime now);
  /// Adopts the explicit rate from a backward RM cell. Returns the new ACR.
  double on_brm(const RmFields& rm);

  SimTime cell_spacing() const;
  double acr() const { return acr_; }
  std::uint32_t vc() const { return vc_; }
  const AbrSourceParams& params() const { return params_; }

  std::size_t queue_length() const { return queue_.size(); }
  std::uint64_t max_queue_seen() const { return max_queue_seen_; }
  std::uint64_t enqueued() const { return enqueued_; }
  std::uint64_t dropped() const { return dropped_; }
  std::uint64_t data_departed() const { return data_departed_; }
  std::uint64_t frm_sent() const { return frm_sent_; }

 private:
  std::uint32_t vc_;
  AbrSourceParams params_;
  double acr_;
  std::deque<Cell> queue_;
  std::uint32_t cells_since_frm_;
  bool sent_any_ = false;
  SimTime last_send_ = 0;

  std::uint64_t max_queue_seen_ = 0;
  std::uint64_t enqueued_ = 0;
  std::uint64_t dropped_ = 0;
  std::uint64_t data_departed_ = 0;
  std::uint64_t frm_sent_ = 0;
};

/// Destination turnaround: the FRM comes back as a BRM with its fields intact.
Cell turnaround(const Cell& frm);

}  // namespace abrsim
