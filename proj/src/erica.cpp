#include "abrsim/erica.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace abrsim {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_outlier(double z) { return z == 0.0 || std::isinf(z); }
}  // namespace

double queue_control_factor(double queue_cells, const EricaParams& params, double link_cell_rate) {
  const double q0 = to_seconds(params.t0) * link_cell_rate;
  const double q = std::max(0.0, queue_cells);
  double f;
  if (q <= q0) {
    f = params.b * q0 / ((params.b - 1.0) * q + q0);
  } else {
    f = params.a * q0 / ((params.a - 1.0) * q + q0);
  }
  return std::max(f, params.qdlf);
}

OverloadAverage1 average_overload_scheme1(OverloadAverage1 state, double z_inst, double alpha_z) {
  if (is_outlier(z_inst)) {
    state.seeded = false;
    return state;
  }
  if (!state.seeded) {
    state.z_avg = z_inst;
  } else {
    state.z_avg = alpha_z * z_inst + (1.0 - alpha_z) * state.z_avg;
  }
  state.seeded = true;
  state.defined = true;
  return state;
}

double OverloadAverage2::z() const {
  if (avg_capacity > 0.0) return avg_input / avg_capacity;
  return kInf;
}

OverloadAverage2 average_overload_scheme2(OverloadAverage2 state, double input_rate,
                                          double capacity, double alpha_z) {
  if (!state.seeded) {
    state.avg_input = input_rate;
    state.avg_capacity = capacity;
    state.seeded = true;
    return state;
  }
  state.avg_input = alpha_z * input_rate + (1.0 - alpha_z) * state.avg_input;
  state.avg_capacity = alpha_z * capacity + (1.0 - alpha_z) * state.avg_capacity;
  return state;
}

double update_activity(double activity, bool seen, double alpha_n) {
  return seen ? 1.0 : activity * alpha_n;
}

EricaPort::EricaPort(const EricaParams& params, double link_cell_rate, std::uint32_t n_vcs)
    : params_(params),
      link_cell_rate_(link_cell_rate),
      n_vcs_(n_vcs),
      seen_(n_vcs, 0),
      last_ccr_(n_vcs, 0.0),
      has_ccr_(n_vcs, 0),
      activity_(n_vcs, 0.0) {
  if (n_vcs == 0) throw std::invalid_argument("ERICA port needs at least one VC");
  metrics_.target_capacity = params_.utilization() * link_cell_rate_;
}

bool EricaPort::on_abr_cell(std::uint32_t vc, bool is_frm, double ccr) {
  ++abr_cells_;
  seen_.at(vc) = 1;
  if (is_frm) {
    last_ccr_[vc] = ccr;
    has_ccr_[vc] = 1;
  }
  return abr_cells_ >= params_.interval_cells;
}

void EricaPort::end_interval(SimTime now, std::uint64_t queue_len) {
  if (now <= interval_start_) return;
  const double seconds = to_seconds(now - interval_start_);

  IntervalMetrics m;
  m.finalized = true;
  m.duration = now - interval_start_;
  m.abr_cells = abr_cells_;
  m.queue_len = queue_len;
  m.abr_input_rate = static_cast<double>(abr_cells_) / seconds;
  m.vbr_rate = static_cast<double>(vbr_cells_) / seconds;
  const double available = std::max(0.0, link_cell_rate_ - m.vbr_rate);
  m.capacity_factor = params_.scheme == EricaScheme::kEricaPlus
                          ? queue_control_factor(static_cast<double>(queue_len), params_,
                                                 link_cell_rate_)
                          : params_.target_utilization;
  m.target_capacity = m.capacity_factor * available;
  m.z_inst = m.target_capacity > 0.0 ? m.abr_input_rate / m.target_capacity : kInf;

  switch (params_.z_averaging) {
    case OverloadAveraging::kNone:
      m.z_eff = m.z_inst;
      break;
    case OverloadAveraging::kScheme1:
      scheme1_ = average_overload_scheme1(scheme1_, m.z_inst, params_.alpha_z);
      m.z_eff = scheme1_.defined ? scheme1_.z_avg : m.z_inst;
      break;
    case OverloadAveraging::kScheme2:
      scheme2_ = average_overload_scheme2(scheme2_, m.abr_input_rate, m.target_capacity,
                                          params_.alpha_z);
      m.z_eff = scheme2_.z();
      break;
  }

  double active = 0.0;
  for (std::uint32_t vc = 0; vc < n_vcs_; ++vc) {
    if (params_.na_averaging) {
      activity_[vc] = update_activity(activity_[vc], seen_[vc] != 0, params_.alpha_n);
    } else {
      activity_[vc] = seen_[vc] ? 1.0 : 0.0;
    }
    active += activity_[vc];
    seen_[vc] = 0;
  }
  m.n_a = std::max(1.0, active);

  metrics_ = m;
  abr_cells_ = 0;
  vbr_cells_ = 0;
  interval_start_ = now;
  ++intervals_;
}

double EricaPort::compute_er(std::uint32_t vc) const {
  if (!metrics_.finalized) return metrics_.target_capacity / n_vcs_;
  const double target = metrics_.target_capacity;
  const double fairshare = target / metrics_.n_a;
  if (!has_ccr_.at(vc)) return std::min(fairshare, target);
  const double z = metrics_.z_eff;
  double vc_share;
  if (z == 0.0) {
    vc_share = kInf;
  } else if (std::isinf(z)) {
    vc_share = 0.0;
  } else {
    vc_share = last_ccr_[vc] / z;
  }
  return std::min(std::max(fairshare, vc_share), target);
}

}  // namespace abrsim
