#include "abrsim/abr.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace abrsim {

AbrSourceParams make_source_params(double link_cell_rate, double icr,
                                   std::optional<std::uint64_t> capacity, std::uint32_t nrm,
                                   bool infinite_demand) {
  AbrSourceParams p;
  p.pcr = link_cell_rate;
  p.acr_floor = link_cell_rate / 10000.0;
  p.icr = std::clamp(icr, p.acr_floor, p.pcr);
  p.nrm = nrm;
  p.capacity = capacity;
  p.infinite_demand = infinite_demand;
  return p;
}

AbrSource::AbrSource(std::uint32_t vc, const AbrSourceParams& params)
    : vc_(vc),
      params_(params),
      acr_(std::clamp(params.icr, params.acr_floor, params.pcr)),
      // The first cell of a VC is an FRM.
      cells_since_frm_(params.nrm - 1) {
  if (!(params.pcr > 0.0) || !(params.acr_floor > 0.0) || params.acr_floor > params.pcr) {
    throw std::invalid_argument("ABR source needs 0 < floor <= PCR");
  }
  if (params.nrm < 2) throw std::invalid_argument("Nrm must be >= 2");
}

std::size_t AbrSource::enqueue_from_tcp(std::span<const Cell> cells) {
  std::size_t accepted = 0;
  for (const Cell& c : cells) {
    if (params_.capacity && queue_.size() >= *params_.capacity) {
      ++dropped_;
      continue;
    }
    queue_.push_back(c);
    ++accepted;
  }
  enqueued_ += accepted;
  max_queue_seen_ = std::max<std::uint64_t>(max_queue_seen_, queue_.size());
  return accepted;
}

SimTime AbrSource::cell_spacing() const { return from_seconds(1.0 / acr_); }

SimTime AbrSource::earliest_departure(SimTime now) const {
  if (!sent_any_) return now;
  return std::max(now, last_send_ + cell_spacing());
}

AbrSource::Departure AbrSource::next_cell_departure(SimTime now) {
  const SimTime at = earliest_departure(now);
  Cell out;
  if (cells_since_frm_ + 1 >= params_.nrm) {
    out.kind = CellKind::kForwardRm;
    out.vc = vc_;
    out.rm.ccr = acr_;
    out.rm.er = params_.pcr;
    cells_since_frm_ = 0;
    ++frm_sent_;
  } else {
    if (!queue_.empty()) {
      out = queue_.front();
      queue_.pop_front();
    } else if (params_.infinite_demand) {
      out.kind = CellKind::kData;
      out.vc = vc_;
    } else {
      throw std::logic_error("ABR source asked to send with an empty queue");
    }
    ++cells_since_frm_;
    ++data_departed_;
  }
  sent_any_ = true;
  last_send_ = at;
  return {out, at};
}

double AbrSource::on_brm(const RmFields& rm) {
  acr_ = std::clamp(std::min(rm.er, params_.pcr), params_.acr_floor, params_.pcr);
  return acr_;
}

Cell turnaround(const Cell& frm) {
  if (frm.kind != CellKind::kForwardRm) throw std::invalid_argument("turnaround needs an FRM cell");
  Cell brm = frm;
  brm.kind = CellKind::kBackwardRm;
  return brm;
}

}  // namespace abrsim
