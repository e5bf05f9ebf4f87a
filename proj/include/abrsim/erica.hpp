#pragma once

#include <cstdint>
#include <vector>

#include "abrsim/config.hpp"
#include "abrsim/event_queue.hpp"

namespace abrsim {

/// ERICA+ capacity scaling as a function of the queue length in cells.
///
/// With q0 = t0 * link_cell_rate the curve is two hyperbolas joined at q0:
///   f(q) = b*q0 / ((b-1)*q + q0)   for q <= q0
///   f(q) = a*q0 / ((a-1)*q + q0)   for q >  q0
/// floored at qdlf. It starts at b, passes through 1 at q0 and never rises.
double queue_control_factor(double queue_cells, const EricaParams& params, double link_cell_rate);

/// Exponential overload average that restarts on outliers (z of 0 or +inf).
/// After a restart the next finite sample seeds the average; until then the
/// last defined value stays in force.
struct OverloadAverage1 {
  double z_avg = 0.0;
  bool seeded = false;   // false after a restart
  bool defined = false;  // some finite sample has ever been seen
};
OverloadAverage1 average_overload_scheme1(OverloadAverage1 state, double z_inst, double alpha_z);

/// Averages input rate and capacity separately; overload is their ratio.
/// Outliers are folded in like any other sample.
struct OverloadAverage2 {
  double avg_input = 0.0;
  double avg_capacity = 0.0;
  bool seeded = false;

  double z() const;
};
OverloadAverage2 average_overload_scheme2(OverloadAverage2 state, double input_rate,
                                          double capacity, double alpha_z);

/// Activity level of one VC after an interval: 1 if seen, else decayed.
double update_activity(double activity, bool seen, double alpha_n);

/// Values computed at the end of the most recent averaging interval.
struct IntervalMetrics {
  bool finalized = false;
  SimTime duration = 0;
  std::uint64_t abr_cells = 0;
  double abr_input_rate = 0.0;   // cells/s
  double vbr_rate = 0.0;         // cells/s
  double capacity_factor = 1.0;  // U for ERICA, f(q) for ERICA+
  double target_capacity = 0.0;  // cells/s
  double z_inst = 0.0;           // +inf when target capacity is zero
  double z_eff = 0.0;            // the overload actually used for feedback
  double n_a = 1.0;
  std::uint64_t queue_len = 0;
};

/// ERICA / ERICA+ state for one output port.
class EricaPort {
 public:
  EricaPort(const EricaParams& params, double link_cell_rate, std::uint32_t n_vcs);

  /// Counts a forward ABR cell (data or FRM). Returns true once the interval
  /// has collected its quota of cells.
  bool on_abr_cell(std::uint32_t vc, bool is_frm, double ccr);
  void on_vbr_cell() { ++vbr_cells_; }

  /// Closes the current interval and opens the next one at `now`.
  void end_interval(SimTime now, std::uint64_t queue_len);

  /// Explicit rate for a VC whose BRM is passing, in cells/s.
  double compute_er(std::uint32_t vc) const;

  const IntervalMetrics& metrics() const { return metrics_; }
  const EricaParams& params() const { return params_; }
  SimTime interval_start() const { return interval_start_; }
  std::uint64_t pending_abr_cells() const { return abr_cells_; }
  double activity(std::uint32_t vc) const { return activity_.at(vc); }
  std::uint64_t intervals_completed() const { return intervals_; }
  const OverloadAverage1& scheme1() const { return scheme1_; }
  const OverloadAverage2& scheme2() const { return scheme2_; }

 private:
  EricaParams params_;
  double link_cell_rate_;
  std::uint32_t n_vcs_;

  SimTime interval_start_ = 0;
  std::uint64_t abr_cells_ = 0;
  std::uint64_t vbr_cells_ = 0;
  std::vector<char> seen_;
  std::vector<double> last_ccr_;
  std::vector<char> has_ccr_;
  std::vector<double> activity_;

  OverloadAverage1 scheme1_;
  OverloadAverage2 scheme2_;
  IntervalMetrics metrics_;
  std::uint64_t intervals_ = 0;
};

}  // namespace abrsim
