#include "abrsim/vbr.hpp"

namespace abrsim {

bool vbr_active(SimTime t, const VbrParams& params) {
  if (!params.enabled || t < params.start_time) return false;
  return (t - params.start_time) % params.period < params.on_duration();
}

SimTime vbr_cell_gap(const VbrParams& params) {
  return from_seconds(kCellBits / (params.amplitude_mbps * 1e6));
}

SimTime next_vbr_cell_time(SimTime t, const VbrParams& params) {
  if (t <= params.start_time) return params.start_time;
  const SimTime gap = vbr_cell_gap(params);
  const SimTime on = params.on_duration();
  const SimTime since = t - params.start_time;
  const SimTime window_start = params.start_time + since / params.period * params.period;
  const SimTime offset = t - window_start;
  SimTime slot = (offset + gap - 1) / gap * gap;
  if (slot < on) return window_start + slot;
  return window_start + params.period;
}

}  // namespace abrsim
